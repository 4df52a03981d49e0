#include "subdeconv/kernels.hpp"

#include "subdeconv/error.hpp"

#include <algorithm>
#include <cmath>

namespace subdeconv::kernels {

namespace {

struct Range {
  Eigen::Index begin;
  Eigen::Index end;
};

Range chunk_range(Eigen::Index n, int chunk) {
  const Eigen::Index size = (n + kChunks - 1) / kChunks;
  const Eigen::Index b = std::min<Eigen::Index>(n, size * chunk);
  return {b, std::min<Eigen::Index>(n, b + size)};
}

double g_value(Nonlinearity g, double u) {
  switch (g) {
    case Nonlinearity::Tanh: return std::tanh(u);
    case Nonlinearity::Cube: return u * u * u;
    case Nonlinearity::Gauss: return u * std::exp(-0.5 * u * u);
  }
  return 0.0;
}

double g_derivative(Nonlinearity g, double u) {
  switch (g) {
    case Nonlinearity::Tanh: {
      const double th = std::tanh(u);
      return 1.0 - th * th;
    }
    case Nonlinearity::Cube: return 3.0 * u * u;
    case Nonlinearity::Gauss: return (1.0 - u * u) * std::exp(-0.5 * u * u);
  }
  return 0.0;
}

Vector row_mean_chunked(const Matrix& f) {
  std::vector<Vector> partial(kChunks, Vector::Zero(f.rows()));
#pragma omp parallel for schedule(static)
  for (int c = 0; c < kChunks; ++c) {
    const Range r = chunk_range(f.cols(), c);
    if (r.end > r.begin) partial[c] = f.middleCols(r.begin, r.end - r.begin).rowwise().sum();
  }
  Vector sum = Vector::Zero(f.rows());
  for (const auto& p : partial) sum += p;
  return sum / static_cast<double>(f.cols());
}

}  // namespace

Matrix centered_covariance(const Matrix& f, Backend backend) {
  const Eigen::Index d = f.rows();
  const Eigen::Index n = f.cols();
  if (backend == Backend::Serial) {
    Vector mean = Vector::Zero(d);
    for (Eigen::Index t = 0; t < n; ++t)
      for (Eigen::Index i = 0; i < d; ++i) mean(i) += f(i, t);
    mean /= static_cast<double>(n);
    Matrix c = Matrix::Zero(d, d);
    for (Eigen::Index t = 0; t < n; ++t)
      for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j <= i; ++j) c(i, j) += (f(i, t) - mean(i)) * (f(j, t) - mean(j));
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < i; ++j) c(j, i) = c(i, j);
    return c / static_cast<double>(n);
  }

  const Vector mean = row_mean_chunked(f);
  std::vector<Matrix> partial(kChunks, Matrix::Zero(d, d));
#pragma omp parallel for schedule(static)
  for (int c = 0; c < kChunks; ++c) {
    const Range r = chunk_range(n, c);
    if (r.end <= r.begin) continue;
    const Matrix centered = f.middleCols(r.begin, r.end - r.begin).colwise() - mean;
    partial[c].selfadjointView<Eigen::Lower>().rankUpdate(centered);
  }
  Matrix sum = Matrix::Zero(d, d);
  for (const auto& p : partial) sum += p;
  Matrix c = sum.selfadjointView<Eigen::Lower>();
  return c / static_cast<double>(n);
}

void gaussian_kernel_column(const Matrix& x, int pivot, double sigma, std::span<double> out,
                            Backend backend) {
  const Eigen::Index n = x.cols();
  if (static_cast<Eigen::Index>(out.size()) != n)
    fail(ErrorCode::DimMismatch, "kernel column output has the wrong length");
  const double scale = -0.5 / (sigma * sigma);
  if (backend == Backend::Serial) {
    for (Eigen::Index t = 0; t < n; ++t) {
      double sq = 0.0;
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double diff = x(i, t) - x(i, pivot);
        sq += diff * diff;
      }
      out[t] = std::exp(scale * sq);
    }
    return;
  }
  const Vector center = x.col(pivot);
#pragma omp parallel for schedule(static)
  for (int c = 0; c < kChunks; ++c) {
    const Range r = chunk_range(n, c);
    for (Eigen::Index t = r.begin; t < r.end; ++t)
      out[t] = std::exp(scale * (x.col(t) - center).squaredNorm());
  }
}

Matrix fir_convolve(const std::vector<Matrix>& taps, const Matrix& s, Backend backend) {
  const int order = static_cast<int>(taps.size()) - 1;
  const Eigen::Index out_count = s.cols() - order;
  const Eigen::Index rows = taps.front().rows();
  Matrix x = Matrix::Zero(rows, std::max<Eigen::Index>(out_count, 0));
  if (out_count <= 0) return x;
  if (backend == Backend::Serial) {
    for (Eigen::Index t = 0; t < out_count; ++t)
      for (int l = 0; l <= order; ++l)
        for (Eigen::Index i = 0; i < rows; ++i)
          for (Eigen::Index j = 0; j < s.rows(); ++j) x(i, t) += taps[l](i, j) * s(j, t + order - l);
    return x;
  }
#pragma omp parallel for schedule(static)
  for (int c = 0; c < kChunks; ++c) {
    const Range r = chunk_range(out_count, c);
    if (r.end <= r.begin) continue;
    const Eigen::Index len = r.end - r.begin;
    for (int l = 0; l <= order; ++l)
      x.middleCols(r.begin, len).noalias() += taps[l] * s.middleCols(r.begin + order - l, len);
  }
  return x;
}

FixedPointMoments fixed_point_moments(const Matrix& w, const Matrix& x, Nonlinearity g,
                                      Backend backend) {
  const Eigen::Index d = w.rows();
  const Eigen::Index n = x.cols();
  FixedPointMoments m{Matrix::Zero(d, x.rows()), Vector::Zero(d)};
  if (backend == Backend::Serial) {
    for (Eigen::Index t = 0; t < n; ++t) {
      for (Eigen::Index i = 0; i < d; ++i) {
        double u = 0.0;
        for (Eigen::Index k = 0; k < x.rows(); ++k) u += w(i, k) * x(k, t);
        const double gv = g_value(g, u);
        for (Eigen::Index k = 0; k < x.rows(); ++k) m.g_x(i, k) += gv * x(k, t);
        m.mean_dg(i) += g_derivative(g, u);
      }
    }
    m.g_x /= static_cast<double>(n);
    m.mean_dg /= static_cast<double>(n);
    return m;
  }
  std::vector<FixedPointMoments> partial(kChunks, m);
#pragma omp parallel for schedule(static)
  for (int c = 0; c < kChunks; ++c) {
    const Range r = chunk_range(n, c);
    if (r.end <= r.begin) continue;
    const auto xs = x.middleCols(r.begin, r.end - r.begin);
    const Matrix u = w * xs;
    Matrix gu(u.rows(), u.cols());
    Vector dsum = Vector::Zero(d);
    for (Eigen::Index t = 0; t < u.cols(); ++t)
      for (Eigen::Index i = 0; i < d; ++i) {
        gu(i, t) = g_value(g, u(i, t));
        dsum(i) += g_derivative(g, u(i, t));
      }
    partial[c].g_x.noalias() = gu * xs.transpose();
    partial[c].mean_dg = dsum;
  }
  for (const auto& p : partial) {
    m.g_x += p.g_x;
    m.mean_dg += p.mean_dg;
  }
  m.g_x /= static_cast<double>(n);
  m.mean_dg /= static_cast<double>(n);
  return m;
}

}  // namespace subdeconv::kernels
