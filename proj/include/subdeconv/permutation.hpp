#pragma once

#include "subdeconv/dependency.hpp"
#include "subdeconv/model.hpp"

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace subdeconv {

/// Dependence cost of Y with its rows rearranged: position i of the permuted
/// signal holds row order[i] of Y, and positions are grouped by the block
/// structure. Implementations may cache state between calls.
class PermutationCost {
 public:
  virtual ~PermutationCost() = default;

  virtual double evaluate(std::span<const int> order) = 0;

  /// Optional cheap estimate of cost(order with positions a, b exchanged) -
  /// cost(order), used to skip hopeless candidates.
  virtual std::optional<double> swap_delta(std::span<const int> /*order*/, int /*a*/, int /*b*/) {
    return std::nullopt;
  }

  /// `order` became the incumbent.
  virtual void accept(std::span<const int> /*order*/) {}
};

/// JFD with the f-covariances of Y computed once; a permutation only
/// rearranges their rows and columns.
class JfdCost final : public PermutationCost {
 public:
  JfdCost(const Matrix& y, BlockStructure blocks, const FunctionSet& fs);

  double evaluate(std::span<const int> order) override;
  std::optional<double> swap_delta(std::span<const int> order, int a, int b) override;

 private:
  BlockStructure blocks_;
  std::vector<Matrix> squared_;  // elementwise squares of cov[f(Y)]
};

/// Kernel measures; Gram factors and pair values are cached by the row sets
/// they were computed from, so a candidate swap only refactors two blocks.
class KernelCost final : public PermutationCost {
 public:
  KernelCost(const Matrix& y, BlockStructure blocks, Measure measure, KernelConfig cfg,
             Aggregation aggregation);

  double evaluate(std::span<const int> order) override;
  void accept(std::span<const int> order) override;

  int factorizations() const { return factorizations_; }

 private:
  using Key = std::vector<int>;

  const GramFactor& factor(const Key& rows);
  double pair_value(const Key& a, const Key& b);
  std::vector<Key> block_keys(std::span<const int> order) const;
  std::vector<Key> needed_keys(std::span<const int> order) const;

  Matrix y_;
  BlockStructure blocks_;
  Measure measure_;
  KernelConfig cfg_;
  Aggregation aggregation_;
  std::map<Key, GramFactor> factors_;
  std::map<std::pair<Key, Key>, double> pairs_;
  std::map<Key, GramFactor> pending_factors_;
  std::map<std::pair<Key, Key>, double> pending_pairs_;
  int factorizations_ = 0;
};

std::unique_ptr<PermutationCost> make_cost(const DependencyMeasure& measure, const SampleMatrix& y,
                                           const BlockStructure& blocks);

struct PermutationResult {
  std::vector<int> order;  // position -> row of the input
  int sweeps = 0;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  std::vector<double> cost_trace;  // cost after every accepted swap
  bool converged = false;

  /// P with P(i, order[i]) = 1, so that P * Y is the regrouped signal.
  Matrix matrix() const;
  bool is_identity() const;
};

/// Rows of `y` rearranged by `order`.
SampleMatrix apply_order(const SampleMatrix& y, std::span<const int> order);

inline constexpr int kDefaultMaxSweeps = 50;

/// Sweeps over all position pairs (a < b, different blocks) in lexicographic
/// order, keeping a swap iff it strictly lowers the cost; stops after a sweep
/// without changes. converged is false if max_sweeps ran out first.
PermutationResult greedy_sweeps(const SampleMatrix& y, const BlockStructure& blocks, PermutationCost& cost,
                                int max_sweeps = kDefaultMaxSweeps);
PermutationResult greedy_sweeps(const SampleMatrix& y, const BlockStructure& blocks,
                                const DependencyMeasure& measure, int max_sweeps = kDefaultMaxSweeps);

inline constexpr int kExhaustiveMaxDim = 8;

/// One order per way of splitting the coordinates into the blocks, up to
/// reordering inside a block and relabeling blocks of equal size.
std::vector<std::vector<int>> partition_orders(const BlockStructure& blocks);

/// Global minimizer over partition_orders(). Throws TooLarge for D > 8.
PermutationResult exhaustive_search(const SampleMatrix& y, const BlockStructure& blocks, PermutationCost& cost);

}  // namespace subdeconv
