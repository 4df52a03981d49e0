#include "subdeconv/permutation.hpp"

#include "subdeconv/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace subdeconv {

// ---------------------------------------------------------------------------
// JfdCost

JfdCost::JfdCost(const Matrix& y, BlockStructure blocks, const FunctionSet& fs)
    : blocks_(std::move(blocks)) {
  if (y.rows() != blocks_.total_dim()) fail(ErrorCode::DimMismatch, "Y dim must equal blocks.D");
  for (const auto& s : f_covariances(y, fs)) squared_.push_back(s.cwiseAbs2());
}

double JfdCost::evaluate(std::span<const int> order) {
  // Summed block pair by block pair over sorted rows, so the value depends
  // only on the partition and not on the order inside a block.
  std::vector<std::vector<int>> rows(blocks_.count());
  for (int m = 0; m < blocks_.count(); ++m) {
    for (int p : blocks_.group(m)) rows[m].push_back(order[p]);
    std::sort(rows[m].begin(), rows[m].end());
  }
  double cost = 0.0;
  for (const auto& sq : squared_)
    for (int i = 0; i < blocks_.count(); ++i)
      for (int j = i + 1; j < blocks_.count(); ++j)
        for (int a : rows[i])
          for (int b : rows[j]) cost += sq(a, b);
  return 2.0 * cost;
}

std::optional<double> JfdCost::swap_delta(std::span<const int> order, int a, int b) {
  const int ga = blocks_.block_of(a);
  const int gb = blocks_.block_of(b);
  const int ra = order[a];
  const int rb = order[b];
  double delta = 0.0;
  for (const auto& sq : squared_)
    for (int c = 0; c < static_cast<int>(order.size()); ++c) {
      if (c == a || c == b) continue;
      const int gc = blocks_.block_of(c);
      const double diff = sq(rb, order[c]) - sq(ra, order[c]);
      delta += ((ga != gc) - (gb != gc)) * diff;
    }
  return 2.0 * delta;
}

// ---------------------------------------------------------------------------
// KernelCost

KernelCost::KernelCost(const Matrix& y, BlockStructure blocks, Measure measure, KernelConfig cfg,
                       Aggregation aggregation)
    : y_(y), blocks_(std::move(blocks)), measure_(measure), cfg_(cfg), aggregation_(aggregation) {
  if (measure_ == Measure::Jfd) fail(ErrorCode::InvalidArgument, "KernelCost needs a kernel measure");
  if (y_.rows() != blocks_.total_dim()) fail(ErrorCode::DimMismatch, "Y dim must equal blocks.D");
  if (blocks_.count() < 2) fail(ErrorCode::SingleBlock, "kernel costs need at least two components");
  validate(cfg_);
}

std::vector<KernelCost::Key> KernelCost::block_keys(std::span<const int> order) const {
  std::vector<Key> keys(blocks_.count());
  for (int m = 0; m < blocks_.count(); ++m) {
    for (int p : blocks_.group(m)) keys[m].push_back(order[p]);
    std::sort(keys[m].begin(), keys[m].end());
  }
  return keys;
}

std::vector<KernelCost::Key> KernelCost::needed_keys(std::span<const int> order) const {
  auto keys = block_keys(order);
  if (aggregation_ == Aggregation::Recursive) {
    const int m_count = blocks_.count();
    for (int m = 1; m + 1 < m_count; ++m) {
      Key tail;
      for (int j = m; j < m_count; ++j) tail.insert(tail.end(), keys[j].begin(), keys[j].end());
      std::sort(tail.begin(), tail.end());
      keys.push_back(std::move(tail));
    }
  }
  return keys;
}

const GramFactor& KernelCost::factor(const Key& rows) {
  if (auto it = factors_.find(rows); it != factors_.end()) return it->second;
  if (auto it = pending_factors_.find(rows); it != pending_factors_.end()) return it->second;
  ++factorizations_;
  return pending_factors_.emplace(rows, gram_factor(select_rows(y_, rows), cfg_)).first->second;
}

double KernelCost::pair_value(const Key& a, const Key& b) {
  const auto key = std::make_pair(a, b);
  if (auto it = pairs_.find(key); it != pairs_.end()) return it->second;
  if (auto it = pending_pairs_.find(key); it != pending_pairs_.end()) return it->second;
  const double v = pair_measure(measure_, factor(a), factor(b), cfg_);
  pending_pairs_.emplace(key, v);
  return v;
}

double KernelCost::evaluate(std::span<const int> order) {
  // Only the most recent evaluation is kept beside the accepted state.
  std::map<Key, GramFactor> keep_factors;
  std::map<std::pair<Key, Key>, double> keep_pairs;
  const auto needed = needed_keys(order);
  for (const auto& k : needed)
    if (auto it = pending_factors_.find(k); it != pending_factors_.end()) keep_factors.insert(*it);
  pending_factors_.swap(keep_factors);
  for (auto& [k, v] : pending_pairs_)
    if (std::find(needed.begin(), needed.end(), k.first) != needed.end() &&
        std::find(needed.begin(), needed.end(), k.second) != needed.end())
      keep_pairs.emplace(k, v);
  pending_pairs_.swap(keep_pairs);

  const auto keys = block_keys(order);
  const int m_count = blocks_.count();
  switch (aggregation_) {
    case Aggregation::Pairwise: {
      double total = 0.0;
      for (int i = 0; i < m_count; ++i)
        for (int j = i + 1; j < m_count; ++j) total += pair_value(keys[i], keys[j]);
      return total;
    }
    case Aggregation::Recursive: {
      double total = 0.0;
      for (int m = 0; m + 1 < m_count; ++m) {
        Key tail;
        for (int j = m + 1; j < m_count; ++j) tail.insert(tail.end(), keys[j].begin(), keys[j].end());
        std::sort(tail.begin(), tail.end());
        total += pair_value(keys[m], tail);
      }
      return total;
    }
    case Aggregation::Multiway: {
      std::vector<GramFactor> grams;
      for (const auto& k : keys) grams.push_back(factor(k));
      return multiway_measure(measure_, grams, cfg_);
    }
  }
  return 0.0;
}

void KernelCost::accept(std::span<const int> order) {
  const auto needed = needed_keys(order);
  std::map<Key, GramFactor> next;
  for (const auto& k : needed) {
    if (next.count(k)) continue;
    if (auto it = factors_.find(k); it != factors_.end()) {
      next.emplace(k, std::move(it->second));
    } else if (auto jt = pending_factors_.find(k); jt != pending_factors_.end()) {
      next.emplace(k, std::move(jt->second));
    } else {
      ++factorizations_;
      next.emplace(k, gram_factor(select_rows(y_, k), cfg_));
    }
  }
  std::map<std::pair<Key, Key>, double> next_pairs;
  for (auto* src : {&pairs_, &pending_pairs_})
    for (auto& [k, v] : *src)
      if (next.count(k.first) && next.count(k.second)) next_pairs.emplace(k, v);
  factors_.swap(next);
  pairs_.swap(next_pairs);
  pending_factors_.clear();
  pending_pairs_.clear();
}

std::unique_ptr<PermutationCost> make_cost(const DependencyMeasure& measure, const SampleMatrix& y,
                                           const BlockStructure& blocks) {
  if (measure.measure == Measure::Jfd) return std::make_unique<JfdCost>(y.data(), blocks, measure.functions);
  return std::make_unique<KernelCost>(y.data(), blocks, measure.measure, measure.kernel, measure.aggregation);
}

// ---------------------------------------------------------------------------
// Search

Matrix PermutationResult::matrix() const {
  const auto n = static_cast<Eigen::Index>(order.size());
  Matrix p = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) p(i, order[i]) = 1.0;
  return p;
}

bool PermutationResult::is_identity() const {
  for (std::size_t i = 0; i < order.size(); ++i)
    if (order[i] != static_cast<int>(i)) return false;
  return true;
}

SampleMatrix apply_order(const SampleMatrix& y, std::span<const int> order) {
  if (static_cast<int>(order.size()) != y.dim()) fail(ErrorCode::DimMismatch, "order length must equal Y dim");
  return SampleMatrix(select_rows(y.data(), order));
}

PermutationResult greedy_sweeps(const SampleMatrix& y, const BlockStructure& blocks, PermutationCost& cost,
                                int max_sweeps) {
  if (y.dim() != blocks.total_dim()) fail(ErrorCode::DimMismatch, "Y dim must equal blocks.D");
  if (max_sweeps < 1) fail(ErrorCode::InvalidArgument, "max_sweeps must be >= 1");
  const int d = y.dim();
  PermutationResult r;
  r.order.resize(d);
  std::iota(r.order.begin(), r.order.end(), 0);
  double current = cost.evaluate(r.order);
  cost.accept(r.order);
  r.initial_cost = current;

  std::vector<int> candidate;
  while (r.sweeps < max_sweeps) {
    ++r.sweeps;
    bool changed = false;
    for (int a = 0; a < d; ++a)
      for (int b = a + 1; b < d; ++b) {
        if (blocks.block_of(a) == blocks.block_of(b)) continue;
        // The estimate only screens; acceptance uses the exact cost.
        if (auto delta = cost.swap_delta(r.order, a, b); delta && *delta >= 1e-9 * std::abs(current))
          continue;
        candidate = r.order;
        std::swap(candidate[a], candidate[b]);
        const double c = cost.evaluate(candidate);
        if (c < current) {
          r.order = candidate;
          current = c;
          cost.accept(r.order);
          r.cost_trace.push_back(c);
          changed = true;
        }
      }
    if (!changed) {
      r.converged = true;
      break;
    }
  }
  r.final_cost = current;
  return r;
}

PermutationResult greedy_sweeps(const SampleMatrix& y, const BlockStructure& blocks,
                                const DependencyMeasure& measure, int max_sweeps) {
  auto cost = make_cost(measure, y, blocks);
  return greedy_sweeps(y, blocks, *cost, max_sweeps);
}

namespace {

void enumerate_partitions(const BlockStructure& blocks, int coord, std::vector<std::vector<int>>& members,
                          std::vector<std::vector<int>>& out) {
  const int m_count = blocks.count();
  if (coord == blocks.total_dim()) {
    std::vector<int> order;
    for (const auto& m : members) order.insert(order.end(), m.begin(), m.end());
    out.push_back(std::move(order));
    return;
  }
  for (int m = 0; m < m_count; ++m) {
    if (static_cast<int>(members[m].size()) == blocks.dim(m)) continue;
    if (members[m].empty()) {
      // An empty block may only be opened if no earlier block of the same
      // size is still empty; this removes relabelings of equal blocks.
      bool earlier_empty = false;
      for (int k = 0; k < m; ++k)
        if (blocks.dim(k) == blocks.dim(m) && members[k].empty()) earlier_empty = true;
      if (earlier_empty) continue;
    }
    members[m].push_back(coord);
    enumerate_partitions(blocks, coord + 1, members, out);
    members[m].pop_back();
  }
}

}  // namespace

std::vector<std::vector<int>> partition_orders(const BlockStructure& blocks) {
  if (blocks.total_dim() > kExhaustiveMaxDim)
    fail(ErrorCode::TooLarge, "exhaustive search is limited to D <= " + std::to_string(kExhaustiveMaxDim));
  std::vector<std::vector<int>> members(blocks.count());
  std::vector<std::vector<int>> out;
  enumerate_partitions(blocks, 0, members, out);
  return out;
}

PermutationResult exhaustive_search(const SampleMatrix& y, const BlockStructure& blocks, PermutationCost& cost) {
  if (y.dim() != blocks.total_dim()) fail(ErrorCode::DimMismatch, "Y dim must equal blocks.D");
  const auto orders = partition_orders(blocks);
  PermutationResult r;
  std::vector<int> identity(y.dim());
  std::iota(identity.begin(), identity.end(), 0);
  r.initial_cost = cost.evaluate(identity);
  double best = INFINITY;
  for (const auto& o : orders) {
    const double c = cost.evaluate(o);
    if (c < best) {
      best = c;
      r.order = o;
    }
  }
  r.final_cost = best;
  r.cost_trace.push_back(best);
  r.converged = true;
  return r;
}

}  // namespace subdeconv
