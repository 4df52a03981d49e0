#pragma once

#include "subdeconv/model.hpp"

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace subdeconv {

// ---------------------------------------------------------------------------
// Joint f-decorrelation
// ---------------------------------------------------------------------------

struct CoordinateFunction {
  std::string name;
  std::function<double(double)> apply;
};

/// Coordinate-wise maps used by the JFD cost; default {cos(u), cos(2u)}.
class FunctionSet {
 public:
  FunctionSet();
  explicit FunctionSet(std::vector<CoordinateFunction> fns);

  /// Known names: cos, cos2, sin, sin2, tanh, square, cube, identity.
  static FunctionSet from_names(std::span<const std::string> names);

  const std::vector<CoordinateFunction>& functions() const { return fns_; }
  std::vector<std::string> names() const;

 private:
  std::vector<CoordinateFunction> fns_;
};

/// N = E_D - blockdiag(E_{d_1}, ..., E_{d_M}).
Matrix block_mask(const BlockStructure& blocks);

/// Empirical covariances of f(Y) for every f in the set (1/T normalization).
std::vector<Matrix> f_covariances(const Matrix& y, const FunctionSet& fs);

/// sum_f |N o cov[f(Y)]|_F^2. Throws DimMismatch.
double jfd_cost(const SampleMatrix& y, const BlockStructure& blocks, const FunctionSet& fs = {});

// ---------------------------------------------------------------------------
// Kernel measures
// ---------------------------------------------------------------------------

struct KernelConfig {
  double sigma = 5.0;
  double kappa = 1e-4;
  /// Relative precision of the incomplete Cholesky factorization.
  double eta = 1e-6;
  int rank_cap = 60;

  double kappa2(int count) const { return kappa * count / 2.0; }
};

void validate(const KernelConfig& cfg);

/// Low-rank factor of the centered Gaussian Gram matrix of one component.
struct GramFactor {
  Matrix g;            // T x r, zero column means, g g^T ~ H K H
  Matrix basis;        // T x q orthonormal eigenbasis of g g^T
  Vector eigenvalues;  // q eigenvalues of g g^T, descending
  double residual = 0.0;  // trace of the (uncentered) pivot residual
  bool capped = false;    // stopped at the rank cap before reaching eta

  int count() const { return static_cast<int>(g.rows()); }
  int rank() const { return static_cast<int>(g.cols()); }
};

/// Pivoted incomplete Cholesky of the Gaussian kernel matrix of the columns
/// of `samples` (d x T), then column-centered.
GramFactor gram_factor(const Matrix& samples, const KernelConfig& cfg);
inline GramFactor gram_factor(const SampleMatrix& samples, const KernelConfig& cfg) {
  return gram_factor(samples.data(), cfg);
}

/// Largest regularized kernel canonical correlation gamma of two components.
double kcca_pair(const GramFactor& u, const GramFactor& v, const KernelConfig& cfg);

/// lambda_max - 1 of the M-block KCCA pencil.
double kcca_multi(std::span<const GramFactor> grams, const KernelConfig& cfg);

/// -1/2 log of the regularized kernel generalized variance.
double kgv_cost(std::span<const GramFactor> grams, const KernelConfig& cfg);

inline constexpr double kKcRidge = 1e-10;

/// lambda_max of the kernel covariance pencil. Throws DegenerateKernel when
/// every centered Gram matrix vanishes.
double kc_multi(std::span<const GramFactor> grams);

/// Q(S) = -1/2 log(det S / prod_m det S^{mm}); +inf if S is singular.
double generalized_variance(const Matrix& sigma, const BlockStructure& blocks);

// ---------------------------------------------------------------------------
// Configured measure + aggregation over components
// ---------------------------------------------------------------------------

enum class Measure { Jfd, Kcca, Kgv, Kc };
enum class Aggregation { Pairwise, Recursive, Multiway };

std::string_view measure_name(Measure m);
Measure parse_measure(std::string_view name);
std::string_view aggregation_name(Aggregation a);
Aggregation parse_aggregation(std::string_view name);

struct DependencyMeasure {
  Measure measure = Measure::Jfd;
  FunctionSet functions;
  KernelConfig kernel;
  Aggregation aggregation = Aggregation::Pairwise;
};

/// Kernel measure of two components (kcca: gamma, kgv: two-block KGV, kc: lambda_max).
double pair_measure(Measure measure, const GramFactor& a, const GramFactor& b, const KernelConfig& cfg);
/// Kernel measure of all components in one pencil.
double multiway_measure(Measure measure, std::span<const GramFactor> grams, const KernelConfig& cfg);

/// Rows of `y` selected by `rows`, as a (rows.size() x T) matrix.
Matrix select_rows(const Matrix& y, std::span<const int> rows);

/// pairwise: sum_{i<j} m(y^i, y^j); recursive: sum_m m(y^m, [y^{m+1}; ...; y^M]);
/// multiway: one M-block pencil. For JFD all three equal jfd_cost.
double aggregate(const DependencyMeasure& measure, const SampleMatrix& y, const BlockStructure& blocks);

}  // namespace subdeconv
