#pragma once

#include "subdeconv/kernels.hpp"
#include "subdeconv/model.hpp"
#include "subdeconv/rng.hpp"

namespace subdeconv {

using kernels::Nonlinearity;

struct IcaConfig {
  Nonlinearity nonlinearity = Nonlinearity::Tanh;
  int max_iter = 200;
  /// Stop when 1 - min_i |<w_i^new, w_i^old>| < tol.
  double tol = 1e-6;
  /// Extra attempts from fresh random orthogonal starts after a failed one.
  int restarts = 5;
  RngSeed seed{};
};

struct IcaResult {
  OrthonormalMap demixing;
  bool converged = false;
  int iterations = 0;  // in the returned attempt
  int attempts = 0;
  double residual = 0.0;
};

/// (W W^T)^{-1/2} W.
Matrix symmetric_decorrelation(const Matrix& w);

/// Symmetric fixed-point ICA on whitened data. Throws NotWhitened when the
/// empirical covariance is more than 1e-2 away from the identity.
IcaResult run_ica(const SampleMatrix& whitened, const IcaConfig& cfg = {});

}  // namespace subdeconv
