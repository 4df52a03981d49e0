#pragma once

#include "subdeconv/model.hpp"

#include <optional>
#include <string>

namespace subdeconv {

/// Temporal concatenation parameters that turn an undercomplete convolutive
/// mixture into an instantaneous ISA task X(t) = A S(t).
struct ConcatPlan {
  int order = 0;  // L
  int depth = 1;  // L', number of stacked observation lags
  int dx = 0;
  int ds = 0;
  BlockStructure source_blocks;
  int isa_dim = 0;  // ds * (L + L')
  /// Every source block repeated L + L' times, component-major.
  BlockStructure isa_blocks;

  int source_depth() const { return order + depth; }
};

/// Smallest L' with dx*L' >= ds*(L + L'), at least 1. Throws NotUndercomplete.
ConcatPlan plan_concat(int dx, int ds, int order, const BlockStructure& blocks);

/// Per observation coordinate, stack [x_i(t); x_i(t-1); ...; x_i(t-L'+1)].
/// Output has dx*L' rows and T - L' + 1 columns; column c is time c + L' - 1.
SampleMatrix temporal_concat(const SampleMatrix& observation, const ConcatPlan& plan);

/// S(t) = [S^1(t); ...; S^M(t)] with S^m(t) = [s^m(t); s^m(t-1); ...] over
/// L + L' lags, aligned so that temporal_concat(apply_fir(H, s)) = A * S.
Matrix stack_source_lags(const SampleMatrix& source, const ConcatPlan& plan);

/// Block-Toeplitz mixing of the concatenated model, dx*L' x ds*(L+L').
Matrix build_concat_mixing(const FirFilter& filter, const ConcatPlan& plan);

inline constexpr double kEigenvalueFloor = 1e-12;

/// PCA whitening. Without a target rank, keeps eigenvalues above
/// kEigenvalueFloor * lambda_max. Throws RankDeficient, TooFewSamples.
Whitener fit_whitener(const SampleMatrix& samples, std::optional<int> target_rank = std::nullopt);

/// Same construction from a known (e.g. population) covariance.
Whitener whitener_from_covariance(const Matrix& cov, const Vector& mean,
                                  std::optional<int> target_rank = std::nullopt);

SampleMatrix apply_whitener(const Whitener& whitener, const SampleMatrix& samples);

std::string whitener_to_json(const Whitener& whitener);
Whitener whitener_from_json(const std::string& text);

}  // namespace subdeconv
