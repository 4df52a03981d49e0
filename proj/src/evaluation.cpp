#include "subdeconv/evaluation.hpp"

#include "subdeconv/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace subdeconv {

GlobalMap make_global_map(Matrix g, BlockStructure blocks_row, BlockStructure blocks_col) {
  if (g.rows() != blocks_row.total_dim() || g.cols() != blocks_col.total_dim())
    fail(ErrorCode::DimMismatch, "G shape does not match the block structures");
  if (blocks_row.count() != blocks_col.count())
    fail(ErrorCode::DimMismatch, "row and column partitions need the same number of blocks");
  if (!g.allFinite()) fail(ErrorCode::InvalidSamples, "G has non-finite entries");
  return {std::move(g), std::move(blocks_row), std::move(blocks_col)};
}

Matrix block_mass(const GlobalMap& g) {
  const int m_count = g.blocks_row.count();
  Matrix mass(m_count, m_count);
  for (int i = 0; i < m_count; ++i)
    for (int j = 0; j < m_count; ++j)
      mass(i, j) = g.g.block(g.blocks_row.offset(i), g.blocks_col.offset(j), g.blocks_row.dim(i),
                             g.blocks_col.dim(j))
                       .cwiseAbs()
                       .sum();
  return mass;
}

double amari_index(const GlobalMap& g) {
  const int m_count = g.blocks_row.count();
  if (m_count < 2 || g.blocks_col.count() < 2) fail(ErrorCode::SingleBlock, "Amari index needs M >= 2");
  const Matrix mass = block_mass(g);
  // An all-zero block row or column counts as maximally spread.
  auto spread = [&](const auto& v) {
    const double mx = v.maxCoeff();
    return mx > 0.0 ? v.sum() / mx - 1.0 : m_count - 1.0;
  };
  double total = 0.0;
  for (int i = 0; i < m_count; ++i) total += spread(mass.row(i));
  for (int j = 0; j < m_count; ++j) total += spread(mass.col(j));
  return std::clamp(total / (2.0 * m_count * (m_count - 1)), 0.0, 1.0);
}

BlockPermutationCheck is_block_permutation(const GlobalMap& g, double tol) {
  const int m_count = g.blocks_row.count();
  if (m_count != g.blocks_col.count()) return {};
  const Matrix mass = block_mass(g);
  const double threshold = tol * mass.maxCoeff();
  if (!(mass.maxCoeff() > 0.0)) return {};
  std::vector<int> assignment(m_count, -1);
  std::vector<int> col_hits(m_count, 0);
  for (int i = 0; i < m_count; ++i) {
    int hits = 0;
    for (int j = 0; j < m_count; ++j)
      if (mass(i, j) > threshold) {
        ++hits;
        ++col_hits[j];
        assignment[i] = j;
      }
    if (hits != 1) return {};
  }
  for (int j = 0; j < m_count; ++j)
    if (col_hits[j] != 1) return {};
  for (int i = 0; i < m_count; ++i)
    if (g.blocks_row.dim(i) != g.blocks_col.dim(assignment[i])) return {};
  return {true, std::move(assignment)};
}

void write_hinton(const Matrix& g, std::ostream& out) {
  const double mx = g.size() ? g.cwiseAbs().maxCoeff() : 0.0;
  for (Eigen::Index j = 0; j < g.cols(); ++j) out << (j ? "," : "") << j;
  out << '\n';
  char buf[32];
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    for (Eigen::Index j = 0; j < g.cols(); ++j) {
      const double v = mx > 0.0 ? std::abs(g(i, j)) / mx : 0.0;
      std::snprintf(buf, sizeof buf, "%.6f", v);
      out << (j ? "," : "") << buf;
    }
    out << '\n';
  }
}

void write_hinton_file(const Matrix& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot open " + path);
  write_hinton(g, out);
  if (!out) fail(ErrorCode::IoError, "write failed: " + path);
}

Matrix read_hinton(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::ParseError, "missing Hinton header");
  const auto cols = std::count(line.begin(), line.end(), ',') + 1;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        fail(ErrorCode::ParseError, "bad Hinton cell '" + cell + "'");
      }
    }
    if (static_cast<long>(row.size()) != cols) fail(ErrorCode::ParseError, "ragged Hinton row");
    rows.push_back(std::move(row));
  }
  Matrix g(static_cast<Eigen::Index>(rows.size()), cols);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (long j = 0; j < cols; ++j) g(static_cast<Eigen::Index>(i), j) = rows[i][j];
  return g;
}

namespace {

// Digamma at a positive integer.
double digamma_int(int n) {
  constexpr double kEulerGamma = 0.57721566490153286061;
  double s = -kEulerGamma;
  for (int j = 1; j < n; ++j) s += 1.0 / j;
  return s;
}

double entropy_sorted(const std::vector<double>& x, int k) {
  const int n = static_cast<int>(x.size());
  double log_sum = 0.0;
  int used = 0;
  for (int i = 0; i < n; ++i) {
    int lo = i - 1;
    int hi = i + 1;
    double eps = 0.0;
    for (int step = 0; step < k; ++step) {
      const double dl = lo >= 0 ? x[i] - x[lo] : INFINITY;
      const double dh = hi < n ? x[hi] - x[i] : INFINITY;
      if (dl <= dh) {
        eps = dl;
        --lo;
      } else {
        eps = dh;
        ++hi;
      }
    }
    // Tied points carry no scale information.
    if (eps > 0.0) {
      log_sum += std::log(eps);
      ++used;
    }
  }
  return digamma_int(n) - digamma_int(k) + std::log(2.0) + log_sum / used;
}

}  // namespace

double entropy_1d(std::span<const double> samples, int k) {
  if (k < 1) fail(ErrorCode::InvalidArgument, "k must be >= 1");
  if (samples.size() < 100) fail(ErrorCode::TooFewSamples, "entropy_1d needs at least 100 samples");
  if (static_cast<int>(samples.size()) <= k) fail(ErrorCode::TooFewSamples, "need more samples than k");
  std::vector<double> x(samples.begin(), samples.end());
  for (double v : x)
    if (!std::isfinite(v)) fail(ErrorCode::InvalidSamples, "non-finite sample");
  std::sort(x.begin(), x.end());
  if (x.front() == x.back()) fail(ErrorCode::DegenerateSamples, "samples have zero spread");
  return entropy_sorted(x, k);
}

WEpiResult w_epi_check(const SampleMatrix& component, int directions, RngSeed seed, int k) {
  constexpr int kSubsamples = 10;
  const int d = component.dim();
  const int t = component.count();
  if (d < 2) fail(ErrorCode::InvalidArgument, "w-EPI check needs d >= 2");
  if (t < 10000) fail(ErrorCode::TooFewSamples, "w-EPI check needs T >= 10^4");
  if (directions < 1) fail(ErrorCode::InvalidArgument, "directions must be >= 1");
  const Matrix& u = component.data();
  const int chunk = t / kSubsamples;

  auto entropy_of = [&](const Eigen::RowVectorXd& row, int begin, int len) {
    return entropy_1d(std::span<const double>(row.data() + begin, static_cast<std::size_t>(len)), k);
  };
  // Coordinate entropies on the full sample and on every subsample.
  Matrix h_coord(d, kSubsamples + 1);
  for (int i = 0; i < d; ++i) {
    const Eigen::RowVectorXd row = u.row(i);
    h_coord(i, 0) = entropy_of(row, 0, t);
    for (int b = 0; b < kSubsamples; ++b) h_coord(i, b + 1) = entropy_of(row, b * chunk, chunk);
  }

  WEpiResult r;
  r.margins.resize(directions);
  r.tolerances.resize(directions);
  std::vector<int> pass(directions, 0);
  std::vector<std::exception_ptr> errors(directions);
#pragma omp parallel for schedule(dynamic)
  for (int n = 0; n < directions; ++n) try {
    Rng rng(split(seed, static_cast<std::uint64_t>(n)));
    Vector w(d);
    for (int i = 0; i < d; ++i) w(i) = rng.normal();
    w.normalize();
    const Vector w2 = w.cwiseAbs2();
    const Eigen::RowVectorXd y = w.transpose() * u;
    auto margin = [&](int col, int begin, int len) {
      return entropy_of(y, begin, len) - w2.dot(h_coord.col(col));
    };
    const double full = margin(0, 0, t);
    std::vector<double> sub(kSubsamples);
    for (int b = 0; b < kSubsamples; ++b) sub[b] = margin(b + 1, b * chunk, chunk);
    const double mean = std::accumulate(sub.begin(), sub.end(), 0.0) / kSubsamples;
    double var = 0.0;
    for (double s : sub) var += (s - mean) * (s - mean);
    var /= kSubsamples - 1;
    // A subsample has 1/B of the data, so the full-sample error is sd / sqrt(B).
    const double tol = 3.0 * std::sqrt(var / kSubsamples);
    r.margins[n] = full;
    r.tolerances[n] = tol;
    pass[n] = full >= -tol;
  } catch (...) {
    errors[n] = std::current_exception();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  r.pass_fraction = static_cast<double>(std::accumulate(pass.begin(), pass.end(), 0)) / directions;
  return r;
}

}  // namespace subdeconv
