#include "subdeconv/model.hpp"

#include "subdeconv/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace subdeconv {

std::vector<int> BlockStructure::group(int m) const {
  std::vector<int> g(dims_[m]);
  for (int i = 0; i < dims_[m]; ++i) g[i] = offsets_[m] + i;
  return g;
}

bool BlockStructure::all_equal() const {
  for (int d : dims_)
    if (d != dims_.front()) return false;
  return true;
}

BlockStructure validate_block_structure(std::span<const int> dims) {
  if (dims.empty()) fail(ErrorCode::EmptyPartition, "block structure needs at least one block");
  BlockStructure b;
  b.offsets_.push_back(0);
  for (std::size_t m = 0; m < dims.size(); ++m) {
    if (dims[m] <= 0)
      fail(ErrorCode::NonPositiveDimension, "block " + std::to_string(m) + " has dimension " +
                                                std::to_string(dims[m]));
    b.dims_.push_back(dims[m]);
    b.offsets_.push_back(b.offsets_.back() + dims[m]);
    for (int i = 0; i < dims[m]; ++i) b.owner_.push_back(static_cast<int>(m));
  }
  return b;
}

BlockStructure uniform_blocks(int count, int dim) {
  std::vector<int> dims(count > 0 ? count : 0, dim);
  return validate_block_structure(dims);
}

SampleMatrix::SampleMatrix(Matrix data) : data_(std::move(data)) {
  if (data_.rows() < 1 || data_.cols() < 1)
    fail(ErrorCode::InvalidSamples, "sample matrix must have D >= 1 and T >= 1");
  if (!data_.allFinite()) fail(ErrorCode::InvalidSamples, "sample matrix has non-finite entries");
}

void write_csv(const SampleMatrix& samples, std::ostream& out) {
  const Matrix& x = samples.data();
  char buf[32];
  for (Eigen::Index t = 0; t < x.cols(); ++t) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      if (i) out << ',';
      std::snprintf(buf, sizeof buf, "%.17g", x(i, t));
      out << buf;
    }
    out << '\n';
  }
}

namespace {

std::vector<double> parse_csv_line(const std::string& line, std::size_t line_no) {
  std::vector<double> values;
  const char* p = line.data();
  const char* end = p + line.size();
  while (true) {
    while (p < end && *p == ' ') ++p;
    double v = 0.0;
    auto [next, ec] = std::from_chars(p, end, v);
    if (ec != std::errc())
      fail(ErrorCode::ParseError, "bad number on line " + std::to_string(line_no));
    values.push_back(v);
    p = next;
    while (p < end && (*p == ' ' || *p == '\r')) ++p;
    if (p == end) break;
    if (*p != ',') fail(ErrorCode::ParseError, "expected ',' on line " + std::to_string(line_no));
    ++p;
  }
  return values;
}

}  // namespace

SampleMatrix read_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto values = parse_csv_line(line, line_no);
    if (!rows.empty() && values.size() != rows.front().size())
      fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + " has " +
                                      std::to_string(values.size()) + " columns, expected " +
                                      std::to_string(rows.front().size()));
    rows.push_back(std::move(values));
  }
  if (rows.empty()) fail(ErrorCode::ParseError, "empty CSV");
  Matrix x(rows.front().size(), rows.size());
  for (std::size_t t = 0; t < rows.size(); ++t)
    for (std::size_t i = 0; i < rows[t].size(); ++i) x(i, t) = rows[t][i];
  return SampleMatrix(std::move(x));
}

void write_csv_file(const SampleMatrix& samples, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot open " + path + " for writing");
  write_csv(samples, out);
}

SampleMatrix read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path);
  return read_csv(in);
}

FirFilter::FirFilter(std::vector<Matrix> taps) : taps_(std::move(taps)) {
  if (taps_.empty()) fail(ErrorCode::ShapeMismatch, "FIR filter needs at least one tap");
  for (const auto& h : taps_)
    if (h.rows() != taps_.front().rows() || h.cols() != taps_.front().cols() || h.size() == 0)
      fail(ErrorCode::ShapeMismatch, "FIR taps must share one non-empty shape");
}

double orthonormality_error(const Matrix& w) {
  if (w.rows() != w.cols()) return INFINITY;
  return (w.transpose() * w - Matrix::Identity(w.rows(), w.cols())).cwiseAbs().maxCoeff();
}

OrthonormalMap::OrthonormalMap(Matrix w) : w_(std::move(w)) {
  const double err = orthonormality_error(w_);
  if (!(err <= kTolerance))
    fail(ErrorCode::NotOrthonormal, "max|W^T W - I| = " + std::to_string(err));
}

IsaTask make_isa_task(SampleMatrix observation, BlockStructure blocks,
                      std::optional<Whitener> whitener, std::optional<Provenance> provenance) {
  if (whitener) {
    if (observation.dim() != blocks.total_dim())
      fail(ErrorCode::DimMismatch, "whitened observation dim must equal blocks.D");
    if (whitener->q.rows() != blocks.total_dim())
      fail(ErrorCode::DimMismatch, "whitener output dim must equal blocks.D");
  } else if (observation.dim() < blocks.total_dim()) {
    fail(ErrorCode::DimMismatch, "observation has fewer coordinates than blocks.D");
  }
  if (provenance) {
    if (provenance->mixing.cols() != blocks.total_dim())
      fail(ErrorCode::DimMismatch, "provenance mixing must have blocks.D columns");
    if (provenance->source_blocks.total_dim() != blocks.total_dim())
      fail(ErrorCode::DimMismatch, "provenance source blocks must cover blocks.D");
    const Eigen::Index pre_dim = whitener ? whitener->q.cols() : observation.dim();
    if (provenance->mixing.rows() != pre_dim)
      fail(ErrorCode::DimMismatch, "provenance mixing rows must match the pre-reduction dim");
  }
  return IsaTask{std::move(observation), std::move(blocks), std::move(whitener),
                 std::move(provenance)};
}

}  // namespace subdeconv
