#include "subdeconv/datagen.hpp"
#include "subdeconv/error.hpp"
#include "subdeconv/kernels.hpp"
#include "subdeconv/preprocess.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace subdeconv;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvalidArgument;
}

Matrix covariance(const Matrix& x) { return kernels::centered_covariance(x, kernels::Backend::Serial); }

// X column c: rows i*L' + r hold x_i(c + L' - 1 - r).
Matrix stack_by_hand(const Matrix& x, int depth) {
  const int dx = static_cast<int>(x.rows());
  const int n = static_cast<int>(x.cols()) - depth + 1;
  Matrix out(dx * depth, n);
  for (int c = 0; c < n; ++c)
    for (int i = 0; i < dx; ++i)
      for (int r = 0; r < depth; ++r) out(i * depth + r, c) = x(i, c + depth - 1 - r);
  return out;
}

// Block-Toeplitz mixing written out entry by entry: the coefficient of
// s_j(t - k) in x_i(t - r) is H_{k-r}(i, j) when 0 <= k - r <= L.
Matrix toeplitz_by_hand(const FirFilter& h, const ConcatPlan& plan) {
  const int depth = plan.source_depth();
  Matrix a = Matrix::Zero(plan.dx * plan.depth, plan.ds * depth);
  const auto& b = plan.source_blocks;
  for (int i = 0; i < plan.dx; ++i)
    for (int r = 0; r < plan.depth; ++r)
      for (int m = 0; m < b.count(); ++m)
        for (int k = 0; k < depth; ++k)
          for (int j = 0; j < b.dim(m); ++j) {
            const int l = k - r;
            if (l < 0 || l > h.order()) continue;
            a(i * plan.depth + r, b.offset(m) * depth + k * b.dim(m) + j) = h.tap(l)(i, b.offset(m) + j);
          }
  return a;
}

}  // namespace

TEST_SUITE("preprocess") {
  TEST_CASE("plan examples") {
    const auto p = plan_concat(8, 4, 1, uniform_blocks(2, 2));
    CHECK(p.depth == 1);
    CHECK(p.isa_dim == 8);
    CHECK(p.isa_blocks == uniform_blocks(4, 2));

    const auto q = plan_concat(36, 18, 5, uniform_blocks(6, 3));
    CHECK(q.isa_dim == 180);
    CHECK(q.isa_blocks.count() == 6 * 10);

    CHECK(code_of([] { plan_concat(4, 4, 1, uniform_blocks(2, 2)); }) == ErrorCode::NotUndercomplete);
    CHECK(code_of([] { plan_concat(3, 4, 1, uniform_blocks(2, 2)); }) == ErrorCode::NotUndercomplete);
  }

  TEST_CASE("plan is the minimal depth satisfying the rank inequality") {
    for (int ds = 1; ds <= 6; ++ds)
      for (int dx = ds + 1; dx <= 12; ++dx)
        for (int l = 0; l <= 6; ++l) {
          const auto p = plan_concat(dx, ds, l, uniform_blocks(1, ds));
          CHECK(dx * p.depth >= ds * (l + p.depth));
          CHECK(p.depth >= 1);
          if (p.depth > 1) CHECK(dx * (p.depth - 1) < ds * (l + p.depth - 1));
          CHECK(p.isa_dim == ds * (l + p.depth));
        }
  }

  TEST_CASE("unequal source blocks repeat per lag") {
    const std::vector<int> dims{1, 3};
    const auto p = plan_concat(8, 4, 2, validate_block_structure(dims));
    REQUIRE(p.depth == 2);
    const std::vector<int> expected{1, 1, 1, 1, 3, 3, 3, 3};
    CHECK(p.isa_blocks.dims() == expected);
  }

  TEST_CASE("temporal concatenation by hand") {
    const SampleMatrix x(Matrix{{1.0, 2.0, 3.0}, {10.0, 20.0, 30.0}});
    auto plan = plan_concat(2, 1, 1, uniform_blocks(1, 1));
    REQUIRE(plan.depth == 1);
    CHECK(temporal_concat(x, plan).data() == x.data());

    plan = plan_concat(2, 1, 2, uniform_blocks(1, 1));
    REQUIRE(plan.depth == 2);
    const Matrix expected{{2.0, 3.0}, {1.0, 2.0}, {20.0, 30.0}, {10.0, 20.0}};
    CHECK(temporal_concat(x, plan).data() == expected);

    CHECK(code_of([&] { temporal_concat(SampleMatrix(Matrix::Ones(2, 1)), plan); }) == ErrorCode::TooFewSamples);
  }

  TEST_CASE("concat mixing small cases") {
    const auto h0 = gen_random_fir(3, 2, 0, RngSeed{1});
    CHECK(build_concat_mixing(h0, plan_concat(3, 2, 0, uniform_blocks(1, 2))) == h0.tap(0));

    const auto h = gen_random_fir(2, 1, 1, RngSeed{2});
    const Matrix a = build_concat_mixing(h, plan_concat(2, 1, 1, uniform_blocks(1, 1)));
    const Matrix expected{{h.tap(0)(0, 0), h.tap(1)(0, 0)}, {h.tap(0)(1, 0), h.tap(1)(1, 0)}};
    CHECK(a == expected);

    CHECK(code_of([&] { build_concat_mixing(h, plan_concat(3, 1, 1, uniform_blocks(1, 1))); }) ==
          ErrorCode::ShapeMismatch);
  }

  TEST_CASE("X = A S on random uBSSD instances") {
    Rng pick(RngSeed{77});
    for (int instance = 0; instance < 20; ++instance) {
      const int m_count = 1 + static_cast<int>(pick.below(3));
      std::vector<int> dims;
      for (int m = 0; m < m_count; ++m) dims.push_back(1 + static_cast<int>(pick.below(3)));
      const auto blocks = validate_block_structure(dims);
      const int ds = blocks.total_dim();
      const int dx = ds + 1 + static_cast<int>(pick.below(4));
      const int l = static_cast<int>(pick.below(4));
      const auto plan = plan_concat(dx, ds, l, blocks);
      const auto h = gen_random_fir(dx, ds, l, split(RngSeed{78}, instance));
      const SampleMatrix s(oracle::random_normal(ds, 40, 1000 + instance));

      const Matrix x = oracle::convolve(h.taps(), s.data());
      const Matrix big_x = stack_by_hand(x, plan.depth);
      const Matrix a = toeplitz_by_hand(h, plan);
      CHECK(build_concat_mixing(h, plan) == a);
      CHECK((temporal_concat(apply_fir(h, s), plan).data() - big_x).cwiseAbs().maxCoeff() < 1e-12);

      const Matrix big_s = stack_source_lags(s, plan);
      REQUIRE(big_s.cols() == big_x.cols());
      // Lag k of coordinate (m, j) at concat column c is s(c + L + L' - 1 - k).
      const int depth = plan.source_depth();
      for (int c = 0; c < big_s.cols(); ++c)
        for (int m = 0; m < blocks.count(); ++m)
          for (int k = 0; k < depth; ++k)
            for (int j = 0; j < blocks.dim(m); ++j)
              CHECK(big_s(blocks.offset(m) * depth + k * blocks.dim(m) + j, c) ==
                    s.data()(blocks.offset(m) + j, c + depth - 1 - k));
      CHECK((a * big_s - big_x).cwiseAbs().maxCoeff() < 1e-12);
    }
  }

  TEST_CASE("whitening already-white data") {
    const Matrix raw = oracle::random_normal(4, 5000, 3);
    const Matrix white = standardize(raw);
    const auto w = fit_whitener(SampleMatrix(white), 4);
    CHECK(orthonormality_error(w.q) < 1e-8);
    const auto out = apply_whitener(w, SampleMatrix(white));
    CHECK((covariance(out.data()) - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-8);
  }

  TEST_CASE("whitening a rank-deficient observation") {
    const Matrix mix = oracle::random_normal(7, 3, 4);
    const Matrix s = oracle::random_normal(3, 2000, 5);
    const SampleMatrix x((mix * s).colwise() + Vector::LinSpaced(7, -3.0, 3.0));
    const auto w = fit_whitener(x);
    CHECK(w.kept_rank == 3);
    CHECK(w.eigenvalue_floor > 0.0);
    const auto out = apply_whitener(w, x);
    CHECK(out.dim() == 3);
    CHECK((covariance(out.data()) - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(out.data().rowwise().mean().cwiseAbs().maxCoeff() < 1e-10);

    CHECK(code_of([&] { fit_whitener(x, 5); }) == ErrorCode::RankDeficient);
    CHECK(code_of([&] { fit_whitener(SampleMatrix(oracle::random_normal(5, 5, 1))); }) == ErrorCode::TooFewSamples);
    CHECK(code_of([&] { apply_whitener(w, SampleMatrix(oracle::random_normal(6, 5, 1))); }) ==
          ErrorCode::DimMismatch);
  }

  TEST_CASE("whitener generalizes to held-out data") {
    const Matrix mix = oracle::random_normal(5, 5, 6);
    const int n = 20000;
    const auto w = fit_whitener(SampleMatrix(mix * oracle::random_normal(5, n, 7)));
    const auto held = apply_whitener(w, SampleMatrix(mix * oracle::random_normal(5, n, 8)));
    CHECK((covariance(held.data()) - Matrix::Identity(5, 5)).cwiseAbs().maxCoeff() < 10.0 / std::sqrt(n));
  }

  TEST_CASE("whitener JSON round trip") {
    const auto w = fit_whitener(SampleMatrix(oracle::random_normal(3, 100, 9)));
    const auto back = whitener_from_json(whitener_to_json(w));
    CHECK(back.mean == w.mean);
    CHECK(back.q == w.q);
    CHECK(back.kept_rank == w.kept_rank);
    CHECK(back.eigenvalue_floor == w.eigenvalue_floor);
    CHECK(code_of([] { whitener_from_json("{\"mean\": [1]}"); }) == ErrorCode::ParseError);
  }

  TEST_CASE("reduced mixing is orthonormal under the population covariance") {
    // Unit-covariance i.i.d. sources give Cov[X] = A A^T exactly.
    const auto blocks = uniform_blocks(2, 2);
    const auto plan = plan_concat(6, 4, 2, blocks);
    const auto h = gen_random_fir(6, 4, 2, RngSeed{10});
    const Matrix a = build_concat_mixing(h, plan);
    const auto w = whitener_from_covariance(a * a.transpose(), Vector::Zero(a.rows()), plan.isa_dim);
    CHECK(orthonormality_error(w.q * a) < 1e-10);
  }

  TEST_CASE("reduced mixing is nearly orthonormal on samples") {
    const std::vector<SourceSpec> specs{{letter_density('A')}, {letter_density('B')}};
    const auto src = gen_source(specs, 100000 + 1, RngSeed{11});
    const auto plan = plan_concat(8, 4, 1, src.blocks);
    const auto h = gen_random_fir(8, 4, 1, RngSeed{12});
    const auto x = temporal_concat(apply_fir(h, src.samples), plan);
    const auto w = fit_whitener(x, plan.isa_dim);
    const Matrix qa = w.q * build_concat_mixing(h, plan);
    CHECK(orthonormality_error(qa) < 1e-1);
  }
}
