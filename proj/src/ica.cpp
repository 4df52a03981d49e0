#include "subdeconv/ica.hpp"

#include "subdeconv/datagen.hpp"
#include "subdeconv/error.hpp"

#include <Eigen/Eigenvalues>

#include <limits>

namespace subdeconv {

Matrix symmetric_decorrelation(const Matrix& w) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(w * w.transpose());
  const Matrix inv_sqrt = eig.eigenvectors() *
                          eig.eigenvalues().cwiseMax(std::numeric_limits<double>::min()).cwiseSqrt().cwiseInverse().asDiagonal() *
                          eig.eigenvectors().transpose();
  return inv_sqrt * w;
}

namespace {

Matrix polish(Matrix w) {
  for (int i = 0; i < 3 && orthonormality_error(w) > 1e-13; ++i) w = symmetric_decorrelation(w);
  return w;
}

}  // namespace

IcaResult run_ica(const SampleMatrix& whitened, const IcaConfig& cfg) {
  if (cfg.max_iter < 1) fail(ErrorCode::InvalidArgument, "max_iter must be >= 1");
  if (!(cfg.tol > 0.0)) fail(ErrorCode::InvalidArgument, "tol must be > 0");
  if (cfg.restarts < 0) fail(ErrorCode::InvalidArgument, "restarts must be >= 0");
  const Matrix& x = whitened.data();
  const int d = whitened.dim();
  const Matrix cov = kernels::centered_covariance(x);
  const double white_err = (cov - Matrix::Identity(d, d)).cwiseAbs().maxCoeff();
  if (!(white_err <= 1e-2))
    fail(ErrorCode::NotWhitened, "input covariance differs from I by " + std::to_string(white_err));

  Matrix best_w;
  double best_residual = std::numeric_limits<double>::infinity();
  int best_iterations = 0;
  int attempts = 0;
  for (int attempt = 0; attempt <= cfg.restarts; ++attempt) {
    ++attempts;
    Matrix w = random_orthogonal(d, split(cfg.seed, static_cast<std::uint64_t>(attempt)));
    double residual = std::numeric_limits<double>::infinity();
    int it = 0;
    while (it < cfg.max_iter) {
      ++it;
      const auto m = kernels::fixed_point_moments(w, x, cfg.nonlinearity);
      const Matrix w_new = symmetric_decorrelation(m.g_x - m.mean_dg.asDiagonal() * w);
      residual = 1.0 - (w_new * w.transpose()).diagonal().cwiseAbs().minCoeff();
      w = w_new;
      if (residual < cfg.tol) break;
    }
    if (residual < best_residual) {
      best_residual = residual;
      best_w = w;
      best_iterations = it;
    }
    if (residual < cfg.tol) break;
  }
  return IcaResult{OrthonormalMap(polish(best_w)), best_residual < cfg.tol, best_iterations, attempts,
                   best_residual};
}

}  // namespace subdeconv
