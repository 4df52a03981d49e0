#include "subdeconv/preprocess.hpp"

#include "subdeconv/error.hpp"
#include "subdeconv/kernels.hpp"

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include <algorithm>

namespace subdeconv {

ConcatPlan plan_concat(int dx, int ds, int order, const BlockStructure& blocks) {
  if (dx <= ds)
    fail(ErrorCode::NotUndercomplete, "temporal concatenation needs D_x > D_s (got " +
                                          std::to_string(dx) + " <= " + std::to_string(ds) + ")");
  if (order < 0) fail(ErrorCode::InvalidArgument, "filter order must be >= 0");
  if (blocks.total_dim() != ds) fail(ErrorCode::DimMismatch, "block structure must cover D_s");

  ConcatPlan plan;
  plan.order = order;
  plan.dx = dx;
  plan.ds = ds;
  // ceil(ds * L / (dx - ds)) in integer arithmetic.
  plan.depth = std::max(1, (ds * order + (dx - ds) - 1) / (dx - ds));
  plan.source_blocks = blocks;
  plan.isa_dim = ds * (order + plan.depth);
  std::vector<int> dims;
  for (int m = 0; m < blocks.count(); ++m)
    for (int k = 0; k < plan.source_depth(); ++k) dims.push_back(blocks.dim(m));
  plan.isa_blocks = validate_block_structure(dims);
  return plan;
}

SampleMatrix temporal_concat(const SampleMatrix& observation, const ConcatPlan& plan) {
  if (observation.dim() != plan.dx) fail(ErrorCode::DimMismatch, "observation dim must equal D_x");
  const int lags = plan.depth;
  if (observation.count() < lags) fail(ErrorCode::TooFewSamples, "need at least L' observations");
  const Matrix& x = observation.data();
  const Eigen::Index out_count = x.cols() - lags + 1;
  Matrix out(static_cast<Eigen::Index>(plan.dx) * lags, out_count);
  for (int i = 0; i < plan.dx; ++i)
    for (int r = 0; r < lags; ++r)
      out.row(i * lags + r) = x.row(i).segment(lags - 1 - r, out_count);
  return SampleMatrix(std::move(out));
}

Matrix stack_source_lags(const SampleMatrix& source, const ConcatPlan& plan) {
  const BlockStructure& b = plan.source_blocks;
  if (source.dim() != b.total_dim()) fail(ErrorCode::DimMismatch, "source dim must equal D_s");
  const int depth = plan.source_depth();
  if (source.count() < depth) fail(ErrorCode::TooFewSamples, "need at least L + L' source samples");
  const Matrix& s = source.data();
  const Eigen::Index out_count = s.cols() - depth + 1;
  Matrix out(static_cast<Eigen::Index>(b.total_dim()) * depth, out_count);
  for (int m = 0; m < b.count(); ++m)
    for (int k = 0; k < depth; ++k)
      for (int j = 0; j < b.dim(m); ++j)
        out.row(b.offset(m) * depth + k * b.dim(m) + j) =
            s.row(b.offset(m) + j).segment(depth - 1 - k, out_count);
  return out;
}

Matrix build_concat_mixing(const FirFilter& filter, const ConcatPlan& plan) {
  if (filter.rows() != plan.dx || filter.cols() != plan.ds || filter.order() != plan.order)
    fail(ErrorCode::ShapeMismatch, "filter shape does not match the concatenation plan");
  const BlockStructure& b = plan.source_blocks;
  const int depth = plan.source_depth();
  Matrix a = Matrix::Zero(static_cast<Eigen::Index>(plan.dx) * plan.depth, plan.isa_dim);
  for (int i = 0; i < plan.dx; ++i)
    for (int r = 0; r < plan.depth; ++r)
      for (int l = 0; l <= plan.order; ++l)
        for (int m = 0; m < b.count(); ++m)
          for (int j = 0; j < b.dim(m); ++j)
            a(i * plan.depth + r, b.offset(m) * depth + (r + l) * b.dim(m) + j) =
                filter.tap(l)(i, b.offset(m) + j);
  return a;
}

Whitener whitener_from_covariance(const Matrix& cov, const Vector& mean,
                                  std::optional<int> target_rank) {
  if (cov.rows() != cov.cols() || cov.rows() != mean.size())
    fail(ErrorCode::DimMismatch, "covariance and mean shapes disagree");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  // Eigen returns ascending eigenvalues; walk them from the top.
  const Vector& lambda = eig.eigenvalues();
  const Eigen::Index n = lambda.size();
  const double lambda_max = lambda(n - 1);
  if (!(lambda_max > 0.0)) fail(ErrorCode::RankDeficient, "covariance is zero");
  int numeric_rank = 0;
  for (Eigen::Index i = n - 1; i >= 0 && lambda(i) > kEigenvalueFloor * lambda_max; --i) ++numeric_rank;

  int keep = numeric_rank;
  if (target_rank) {
    if (*target_rank < 1) fail(ErrorCode::InvalidArgument, "target rank must be >= 1");
    if (*target_rank > numeric_rank)
      fail(ErrorCode::RankDeficient, "requested rank " + std::to_string(*target_rank) +
                                         " exceeds numerical rank " + std::to_string(numeric_rank));
    keep = *target_rank;
  }
  Whitener w;
  w.mean = mean;
  w.kept_rank = keep;
  w.eigenvalue_floor = kEigenvalueFloor;
  w.q.resize(keep, n);
  for (int k = 0; k < keep; ++k) {
    const Eigen::Index idx = n - 1 - k;
    w.q.row(k) = eig.eigenvectors().col(idx).transpose() / std::sqrt(lambda(idx));
  }
  return w;
}

Whitener fit_whitener(const SampleMatrix& samples, std::optional<int> target_rank) {
  if (samples.count() <= samples.dim())
    fail(ErrorCode::TooFewSamples, "whitening needs more samples than dimensions");
  const Vector mean = samples.data().rowwise().mean();
  return whitener_from_covariance(kernels::centered_covariance(samples.data()), mean, target_rank);
}

SampleMatrix apply_whitener(const Whitener& whitener, const SampleMatrix& samples) {
  if (samples.dim() != whitener.q.cols()) fail(ErrorCode::DimMismatch, "whitener input dim mismatch");
  return SampleMatrix(whitener.q * (samples.data().colwise() - whitener.mean));
}

std::string whitener_to_json(const Whitener& whitener) {
  nlohmann::json j;
  j["mean"] = std::vector<double>(whitener.mean.data(), whitener.mean.data() + whitener.mean.size());
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < whitener.q.rows(); ++r) {
    std::vector<double> row(whitener.q.cols());
    for (Eigen::Index c = 0; c < whitener.q.cols(); ++c) row[c] = whitener.q(r, c);
    rows.push_back(row);
  }
  j["q"] = rows;
  j["kept_rank"] = whitener.kept_rank;
  j["eigenvalue_floor"] = whitener.eigenvalue_floor;
  return j.dump(2);
}

Whitener whitener_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    Whitener w;
    const auto mean = j.at("mean").get<std::vector<double>>();
    w.mean = Eigen::Map<const Vector>(mean.data(), static_cast<Eigen::Index>(mean.size()));
    const auto rows = j.at("q").get<std::vector<std::vector<double>>>();
    w.kept_rank = j.at("kept_rank").get<int>();
    w.eigenvalue_floor = j.at("eigenvalue_floor").get<double>();
    w.q.resize(static_cast<Eigen::Index>(rows.size()), w.mean.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (static_cast<Eigen::Index>(rows[r].size()) != w.mean.size())
        fail(ErrorCode::ParseError, "whitener row length does not match mean");
      for (std::size_t c = 0; c < rows[r].size(); ++c) w.q(r, c) = rows[r][c];
    }
    if (w.kept_rank != w.q.rows()) fail(ErrorCode::ParseError, "kept_rank does not match Q rows");
    return w;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, std::string("whitener JSON: ") + e.what());
  }
}

}  // namespace subdeconv
