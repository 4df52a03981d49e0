#include "subdeconv/dependency.hpp"

#include "subdeconv/error.hpp"
#include "subdeconv/kernels.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace subdeconv {

// ---------------------------------------------------------------------------
// JFD

namespace {

CoordinateFunction named_function(const std::string& name) {
  if (name == "cos") return {name, [](double u) { return std::cos(u); }};
  if (name == "cos2") return {name, [](double u) { return std::cos(2.0 * u); }};
  if (name == "sin") return {name, [](double u) { return std::sin(u); }};
  if (name == "sin2") return {name, [](double u) { return std::sin(2.0 * u); }};
  if (name == "tanh") return {name, [](double u) { return std::tanh(u); }};
  if (name == "square") return {name, [](double u) { return u * u; }};
  if (name == "cube") return {name, [](double u) { return u * u * u; }};
  if (name == "identity") return {name, [](double u) { return u; }};
  fail(ErrorCode::InvalidArgument, "unknown coordinate function '" + name + "'");
}

}  // namespace

FunctionSet::FunctionSet() : fns_{named_function("cos"), named_function("cos2")} {}

FunctionSet::FunctionSet(std::vector<CoordinateFunction> fns) : fns_(std::move(fns)) {
  if (fns_.empty()) fail(ErrorCode::InvalidArgument, "function set must not be empty");
}

FunctionSet FunctionSet::from_names(std::span<const std::string> names) {
  std::vector<CoordinateFunction> fns;
  for (const auto& n : names) fns.push_back(named_function(n));
  return FunctionSet(std::move(fns));
}

std::vector<std::string> FunctionSet::names() const {
  std::vector<std::string> out;
  for (const auto& f : fns_) out.push_back(f.name);
  return out;
}

Matrix block_mask(const BlockStructure& blocks) {
  const int d = blocks.total_dim();
  Matrix n = Matrix::Ones(d, d);
  for (int m = 0; m < blocks.count(); ++m)
    n.block(blocks.offset(m), blocks.offset(m), blocks.dim(m), blocks.dim(m)).setZero();
  return n;
}

std::vector<Matrix> f_covariances(const Matrix& y, const FunctionSet& fs) {
  std::vector<Matrix> out;
  for (const auto& f : fs.functions()) out.push_back(kernels::centered_covariance(y.unaryExpr(f.apply)));
  return out;
}

double jfd_cost(const SampleMatrix& y, const BlockStructure& blocks, const FunctionSet& fs) {
  if (y.dim() != blocks.total_dim()) fail(ErrorCode::DimMismatch, "Y dim must equal blocks.D");
  const Matrix mask = block_mask(blocks);
  double cost = 0.0;
  for (const auto& sigma : f_covariances(y.data(), fs)) cost += mask.cwiseProduct(sigma).squaredNorm();
  return cost;
}

// ---------------------------------------------------------------------------
// Kernel measures

void validate(const KernelConfig& cfg) {
  if (!(cfg.sigma > 0.0)) fail(ErrorCode::InvalidArgument, "kernel width sigma must be > 0");
  if (!(cfg.kappa > 0.0)) fail(ErrorCode::InvalidArgument, "kappa must be > 0");
  if (!(cfg.eta >= 0.0)) fail(ErrorCode::InvalidArgument, "eta must be >= 0");
  if (cfg.rank_cap < 1) fail(ErrorCode::InvalidArgument, "rank cap must be >= 1");
}

namespace {

// Pivot diagonals below this are treated as exhausted (k(x, x) = 1).
constexpr double kPivotFloor = 1e-14;

}  // namespace

GramFactor gram_factor(const Matrix& samples, const KernelConfig& cfg) {
  validate(cfg);
  const Eigen::Index n = samples.cols();
  if (n < 2) fail(ErrorCode::TooFewSamples, "Gram factorization needs T >= 2");
  const Eigen::Index cap = std::min<Eigen::Index>(n, cfg.rank_cap);

  Matrix g0(n, cap);
  Vector diag = Vector::Ones(n);
  std::vector<double> column(n);
  double centered_norm2 = 0.0;
  Eigen::Index rank = 0;
  auto converged = [&] { return diag.sum() <= cfg.eta * centered_norm2 || diag.maxCoeff() <= kPivotFloor; };
  while (rank < cap) {
    if (rank > 0 && converged()) break;
    Eigen::Index pivot = 0;
    const double dmax = diag.maxCoeff(&pivot);
    kernels::gaussian_kernel_column(samples, static_cast<int>(pivot), cfg.sigma, column);
    Eigen::Map<const Vector> kcol(column.data(), n);
    Vector g = kcol;
    if (rank > 0) g.noalias() -= g0.leftCols(rank) * g0.row(pivot).head(rank).transpose();
    g /= std::sqrt(dmax);
    g0.col(rank) = g;
    diag = (diag - g.cwiseAbs2()).cwiseMax(0.0);
    diag(pivot) = 0.0;
    const double s = g.sum();
    centered_norm2 += g.squaredNorm() - s * s / static_cast<double>(n);
    ++rank;
  }

  GramFactor f;
  f.residual = diag.sum();
  f.capped = !converged();
  f.g = g0.leftCols(rank);
  f.g.rowwise() -= f.g.colwise().mean();

  Eigen::SelfAdjointEigenSolver<Matrix> eig(f.g.transpose() * f.g);
  const Vector& lambda = eig.eigenvalues();
  const double lmax = lambda.size() ? lambda.maxCoeff() : 0.0;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = lambda.size() - 1; i >= 0; --i)
    if (lambda(i) > 1e-12 * lmax && lambda(i) > 0.0) keep.push_back(i);
  f.eigenvalues.resize(static_cast<Eigen::Index>(keep.size()));
  f.basis.resize(n, static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    f.eigenvalues(k) = lambda(keep[k]);
    f.basis.col(k) = f.g * eig.eigenvectors().col(keep[k]) / std::sqrt(lambda(keep[k]));
  }
  if (lmax == 0.0) f.g.resize(n, 0);
  return f;
}

namespace {

void check_counts(std::span<const GramFactor> grams, std::size_t min_blocks) {
  if (grams.size() < min_blocks)
    fail(ErrorCode::InvalidArgument, "kernel measure needs at least " + std::to_string(min_blocks) +
                                         " components");
  for (const auto& g : grams)
    if (g.count() != grams.front().count())
      fail(ErrorCode::DimMismatch, "all components must have the same sample count");
}

enum class PencilKind { Kcca, Kc };

// Symmetric matrix whose eigenvalues are the non-trivial generalized
// eigenvalues of the pencil, expressed in the orthonormal factor bases.
Matrix reduced_pencil(std::span<const GramFactor> grams, PencilKind kind, double reg,
                      std::vector<int>* sizes) {
  std::vector<Vector> scale;
  std::vector<Vector> diag;
  std::vector<int> offsets{0};
  for (const auto& g : grams) {
    const Vector& l = g.eigenvalues;
    if (kind == PencilKind::Kcca) {
      scale.push_back(l.array() / (l.array() + reg));
      diag.push_back(Vector::Ones(l.size()));
    } else {
      scale.push_back(l.array() / (l.array() + reg).sqrt());
      diag.push_back(l.array() / (l.array() + reg));
    }
    offsets.push_back(offsets.back() + static_cast<int>(l.size()));
  }
  const int total = offsets.back();
  Matrix r = Matrix::Zero(total, total);
  for (std::size_t i = 0; i < grams.size(); ++i) {
    const int ri = offsets[i + 1] - offsets[i];
    r.block(offsets[i], offsets[i], ri, ri) = diag[i].asDiagonal();
    for (std::size_t j = i + 1; j < grams.size(); ++j) {
      const int rj = offsets[j + 1] - offsets[j];
      if (ri == 0 || rj == 0) continue;
      const Matrix cross =
          scale[i].asDiagonal() * (grams[i].basis.transpose() * grams[j].basis) * scale[j].asDiagonal();
      r.block(offsets[i], offsets[j], ri, rj) = cross;
      r.block(offsets[j], offsets[i], rj, ri) = cross.transpose();
    }
  }
  if (sizes) {
    sizes->clear();
    for (std::size_t i = 0; i + 1 < offsets.size(); ++i) sizes->push_back(offsets[i + 1] - offsets[i]);
  }
  return r;
}

double largest_eigenvalue(const Matrix& r) {
  if (r.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(r, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().maxCoeff();
}

}  // namespace

double kcca_pair(const GramFactor& u, const GramFactor& v, const KernelConfig& cfg) {
  if (u.count() != v.count()) fail(ErrorCode::DimMismatch, "components must have the same sample count");
  if (u.eigenvalues.size() == 0 || v.eigenvalues.size() == 0) return 0.0;
  const double k2 = cfg.kappa2(u.count());
  const Vector ru = u.eigenvalues.array() / (u.eigenvalues.array() + k2);
  const Vector rv = v.eigenvalues.array() / (v.eigenvalues.array() + k2);
  const Matrix cross = ru.asDiagonal() * (u.basis.transpose() * v.basis) * rv.asDiagonal();
  Eigen::JacobiSVD<Matrix> svd(cross);
  return svd.singularValues()(0);
}

double kcca_multi(std::span<const GramFactor> grams, const KernelConfig& cfg) {
  check_counts(grams, 2);
  const Matrix r = reduced_pencil(grams, PencilKind::Kcca, cfg.kappa2(grams.front().count()), nullptr);
  // Directions outside the factor spans carry generalized eigenvalue 1.
  return std::max(1.0, largest_eigenvalue(r)) - 1.0;
}

double kgv_cost(std::span<const GramFactor> grams, const KernelConfig& cfg) {
  check_counts(grams, 2);
  const Matrix r = reduced_pencil(grams, PencilKind::Kcca, cfg.kappa2(grams.front().count()), nullptr);
  if (r.size() == 0) return 0.0;
  Eigen::LLT<Matrix> llt(r);
  if (llt.info() != Eigen::Success)
    fail(ErrorCode::NonFiniteDeterminant, "regularized kernel covariance is not positive definite");
  const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  if (!std::isfinite(logdet)) fail(ErrorCode::NonFiniteDeterminant, "log-determinant is not finite");
  return -0.5 * logdet;
}

double kc_multi(std::span<const GramFactor> grams) {
  check_counts(grams, 2);
  bool any = false;
  for (const auto& g : grams) any = any || g.eigenvalues.size() > 0;
  if (!any) fail(ErrorCode::DegenerateKernel, "every centered Gram matrix is zero");
  const Matrix r = reduced_pencil(grams, PencilKind::Kc, kKcRidge, nullptr);
  // Directions outside the factor spans carry generalized eigenvalue 0.
  return std::max(0.0, largest_eigenvalue(r));
}

double generalized_variance(const Matrix& sigma, const BlockStructure& blocks) {
  if (sigma.rows() != sigma.cols() || sigma.rows() != blocks.total_dim())
    fail(ErrorCode::DimMismatch, "matrix must be D x D for the block structure");
  auto logdet = [](const Matrix& s) {
    Eigen::LDLT<Matrix> ldlt(s);
    const Vector d = ldlt.vectorD();
    if (ldlt.info() != Eigen::Success || (d.array() <= 0.0).any())
      return -std::numeric_limits<double>::infinity();
    return d.array().log().sum();
  };
  double blocks_logdet = 0.0;
  for (int m = 0; m < blocks.count(); ++m) {
    const double l = logdet(sigma.block(blocks.offset(m), blocks.offset(m), blocks.dim(m), blocks.dim(m)));
    if (!std::isfinite(l)) fail(ErrorCode::NonFiniteDeterminant, "a diagonal block is singular");
    blocks_logdet += l;
  }
  const double full = logdet(sigma);
  if (!std::isfinite(full)) return std::numeric_limits<double>::infinity();
  return -0.5 * (full - blocks_logdet);
}

// ---------------------------------------------------------------------------
// Aggregation

std::string_view measure_name(Measure m) {
  switch (m) {
    case Measure::Jfd: return "jfd";
    case Measure::Kcca: return "kcca";
    case Measure::Kgv: return "kgv";
    case Measure::Kc: return "kc";
  }
  return "unknown";
}

Measure parse_measure(std::string_view name) {
  for (Measure m : {Measure::Jfd, Measure::Kcca, Measure::Kgv, Measure::Kc})
    if (measure_name(m) == name) return m;
  fail(ErrorCode::ConfigError, "unknown measure '" + std::string(name) + "'");
}

std::string_view aggregation_name(Aggregation a) {
  switch (a) {
    case Aggregation::Pairwise: return "pairwise";
    case Aggregation::Recursive: return "recursive";
    case Aggregation::Multiway: return "multiway";
  }
  return "unknown";
}

Aggregation parse_aggregation(std::string_view name) {
  for (Aggregation a : {Aggregation::Pairwise, Aggregation::Recursive, Aggregation::Multiway})
    if (aggregation_name(a) == name) return a;
  fail(ErrorCode::ConfigError, "unknown aggregation '" + std::string(name) + "'");
}

double pair_measure(Measure measure, const GramFactor& a, const GramFactor& b, const KernelConfig& cfg) {
  switch (measure) {
    case Measure::Kcca: return kcca_pair(a, b, cfg);
    case Measure::Kgv: {
      const GramFactor pair[] = {a, b};
      return kgv_cost(pair, cfg);
    }
    case Measure::Kc: {
      const GramFactor pair[] = {a, b};
      return kc_multi(pair);
    }
    case Measure::Jfd: break;
  }
  fail(ErrorCode::InvalidArgument, "pair_measure needs a kernel measure");
}

double multiway_measure(Measure measure, std::span<const GramFactor> grams, const KernelConfig& cfg) {
  switch (measure) {
    case Measure::Kcca: return kcca_multi(grams, cfg);
    case Measure::Kgv: return kgv_cost(grams, cfg);
    case Measure::Kc: return kc_multi(grams);
    case Measure::Jfd: break;
  }
  fail(ErrorCode::InvalidArgument, "multiway_measure needs a kernel measure");
}

Matrix select_rows(const Matrix& y, std::span<const int> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), y.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(i) = y.row(rows[i]);
  return out;
}

double aggregate(const DependencyMeasure& dm, const SampleMatrix& y, const BlockStructure& blocks) {
  if (y.dim() != blocks.total_dim()) fail(ErrorCode::DimMismatch, "Y dim must equal blocks.D");
  if (blocks.count() < 2) fail(ErrorCode::SingleBlock, "aggregation needs at least two components");
  if (dm.measure == Measure::Jfd) return jfd_cost(y, blocks, dm.functions);

  const int m_count = blocks.count();
  std::vector<GramFactor> grams;
  for (int m = 0; m < m_count; ++m) {
    const auto rows = blocks.group(m);
    grams.push_back(gram_factor(select_rows(y.data(), rows), dm.kernel));
  }
  switch (dm.aggregation) {
    case Aggregation::Pairwise: {
      double total = 0.0;
      for (int i = 0; i < m_count; ++i)
        for (int j = i + 1; j < m_count; ++j) total += pair_measure(dm.measure, grams[i], grams[j], dm.kernel);
      return total;
    }
    case Aggregation::Recursive: {
      double total = 0.0;
      for (int m = 0; m + 1 < m_count; ++m) {
        std::vector<int> tail;
        for (int j = m + 1; j < m_count; ++j)
          for (int r : blocks.group(j)) tail.push_back(r);
        const GramFactor rest =
            (m + 2 == m_count) ? grams[m + 1] : gram_factor(select_rows(y.data(), tail), dm.kernel);
        total += pair_measure(dm.measure, grams[m], rest, dm.kernel);
      }
      return total;
    }
    case Aggregation::Multiway: return multiway_measure(dm.measure, grams, dm.kernel);
  }
  return 0.0;
}

}  // namespace subdeconv
