#include "subdeconv/error.hpp"
#include "subdeconv/model.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <numeric>
#include <sstream>

using namespace subdeconv;

namespace {

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("block structure derived fields") {
    const std::vector<int> six(6, 3);
    const auto b = validate_block_structure(six);
    CHECK(b.count() == 6);
    CHECK(b.total_dim() == 18);
    CHECK(b.offset(2) == 6);
    CHECK(b.block_of(17) == 5);

    const std::vector<int> one{2};
    const auto single = validate_block_structure(one);
    CHECK(single.count() == 1);
    CHECK(single.total_dim() == 2);
  }

  TEST_CASE("block structure rejects bad partitions") {
    const std::vector<int> zero{2, 0};
    CHECK(code_of([&] { validate_block_structure(zero); }) == ErrorCode::NonPositiveDimension);
    const std::vector<int> negative{-1};
    CHECK(code_of([&] { validate_block_structure(negative); }) == ErrorCode::NonPositiveDimension);
    CHECK(code_of([] { validate_block_structure({}); }) == ErrorCode::EmptyPartition);
  }

  TEST_CASE("groups concatenate to 0..D-1") {
    const std::vector<int> dims{1, 4, 2, 3};
    const auto b = validate_block_structure(dims);
    std::vector<int> all;
    for (int m = 0; m < b.count(); ++m) {
      const auto g = b.group(m);
      CHECK(static_cast<int>(g.size()) == b.dim(m));
      for (int i : g) CHECK(b.block_of(i) == m);
      all.insert(all.end(), g.begin(), g.end());
    }
    std::vector<int> expected(b.total_dim());
    std::iota(expected.begin(), expected.end(), 0);
    CHECK(all == expected);
    CHECK_FALSE(b.all_equal());
    CHECK(uniform_blocks(3, 2).all_equal());
  }

  TEST_CASE("sample matrix validation") {
    CHECK(code_of([] { SampleMatrix(Matrix(0, 3)); }) == ErrorCode::InvalidSamples);
    CHECK(code_of([] { SampleMatrix(Matrix(2, 0)); }) == ErrorCode::InvalidSamples);
    Matrix bad = Matrix::Zero(2, 2);
    bad(1, 1) = std::nan("");
    CHECK(code_of([&] { SampleMatrix{bad}; }) == ErrorCode::InvalidSamples);
    bad(1, 1) = INFINITY;
    CHECK(code_of([&] { SampleMatrix{bad}; }) == ErrorCode::InvalidSamples);
  }

  TEST_CASE("CSV round trip is bit exact") {
    Matrix m = oracle::random_normal(3, 40, 7);
    m(0, 0) = 1e-300;
    m(1, 0) = -123456789.123456789;
    const SampleMatrix s(m);
    std::stringstream ss;
    write_csv(s, ss);
    const auto back = read_csv(ss);
    CHECK(back.data() == m);

    std::stringstream again;
    write_csv(back, again);
    std::stringstream first;
    write_csv(s, first);
    CHECK(again.str() == first.str());
  }

  TEST_CASE("CSV has one line per time step and no header") {
    const SampleMatrix s(Matrix{{1.0, 2.0, 3.0}, {4.0, 5.0, 6.0}});
    std::stringstream ss;
    write_csv(s, ss);
    CHECK(ss.str() == "1,4\n2,5\n3,6\n");
  }

  TEST_CASE("CSV reader checks column counts strictly") {
    std::stringstream ragged("1,2\n3\n");
    CHECK(code_of([&] { read_csv(ragged); }) == ErrorCode::ParseError);
    std::stringstream junk("1,x\n");
    CHECK(code_of([&] { read_csv(junk); }) == ErrorCode::ParseError);
    std::stringstream empty("");
    CHECK(code_of([&] { read_csv(empty); }) == ErrorCode::ParseError);
    std::stringstream trailing("1,2,\n");
    CHECK(code_of([&] { read_csv(trailing); }) == ErrorCode::ParseError);
  }

  TEST_CASE("FIR filter shape checks") {
    CHECK(code_of([] { FirFilter({}); }) == ErrorCode::ShapeMismatch);
    CHECK(code_of([] { FirFilter({Matrix::Zero(2, 2), Matrix::Zero(2, 3)}); }) == ErrorCode::ShapeMismatch);
    const FirFilter f({Matrix::Zero(8, 4), Matrix::Zero(8, 4)});
    CHECK(f.order() == 1);
    CHECK(f.rows() == 8);
    CHECK(f.cols() == 4);
  }

  TEST_CASE("orthonormal map bound") {
    Eigen::HouseholderQR<Matrix> qr(oracle::random_normal(5, 5, 3));
    const Matrix q = qr.householderQ();
    CHECK_NOTHROW(OrthonormalMap{q});
    Matrix off = q;
    off(0, 0) += 1e-8;
    CHECK(code_of([&] { OrthonormalMap{off}; }) == ErrorCode::NotOrthonormal);
    CHECK(code_of([] { OrthonormalMap{Matrix::Identity(2, 3)}; }) == ErrorCode::NotOrthonormal);
  }

  TEST_CASE("ISA task cross checks") {
    const SampleMatrix obs(oracle::random_normal(4, 10, 1));
    CHECK_NOTHROW(make_isa_task(obs, uniform_blocks(2, 2)));
    CHECK(code_of([&] { make_isa_task(obs, uniform_blocks(3, 2)); }) == ErrorCode::DimMismatch);
    Provenance p{Matrix::Zero(6, 3), uniform_blocks(1, 3)};
    CHECK(code_of([&] { make_isa_task(obs, uniform_blocks(2, 2), std::nullopt, p); }) == ErrorCode::DimMismatch);
  }
}
