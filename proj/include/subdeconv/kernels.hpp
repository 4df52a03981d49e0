#pragma once

// Data-parallel inner loops of the pipeline. Each kernel has a plain serial
// reference and an OpenMP version. The OpenMP versions split the time axis
// into a fixed number of chunks and combine partial sums in chunk order, so
// their output does not depend on the number of threads.

#include "subdeconv/model.hpp"

#include <span>
#include <vector>

namespace subdeconv::kernels {

enum class Backend { Serial, Parallel };

inline constexpr int kChunks = 64;

enum class Nonlinearity { Tanh, Cube, Gauss };

/// (1/T) sum_t (f_t - mean)(f_t - mean)^T for the columns f_t of `f`.
Matrix centered_covariance(const Matrix& f, Backend backend = Backend::Parallel);

/// out[t] = exp(-|x_t - x_pivot|^2 / (2 sigma^2)).
void gaussian_kernel_column(const Matrix& x, int pivot, double sigma, std::span<double> out,
                            Backend backend = Backend::Parallel);

/// x(t) = sum_l H_l s(t - l) for t = L..T-1; returns T - L columns.
Matrix fir_convolve(const std::vector<Matrix>& taps, const Matrix& s,
                    Backend backend = Backend::Parallel);

struct FixedPointMoments {
  Matrix g_x;      // (1/T) g(W X) X^T
  Vector mean_dg;  // row means of g'(W X)
};

/// Expectations needed by one symmetric fixed-point ICA update.
FixedPointMoments fixed_point_moments(const Matrix& w, const Matrix& x, Nonlinearity g,
                                      Backend backend = Backend::Parallel);

}  // namespace subdeconv::kernels
