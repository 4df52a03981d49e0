#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace subdeconv {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Partition [d_1..d_M] of D coordinates into M contiguous groups.
class BlockStructure {
 public:
  BlockStructure() = default;

  int count() const { return static_cast<int>(dims_.size()); }
  int total_dim() const { return offsets_.empty() ? 0 : offsets_.back(); }
  int dim(int m) const { return dims_[m]; }
  int offset(int m) const { return offsets_[m]; }
  const std::vector<int>& dims() const { return dims_; }
  /// Index of the group that owns coordinate i.
  int block_of(int i) const { return owner_[i]; }
  /// Coordinates of group m, ascending.
  std::vector<int> group(int m) const;
  bool all_equal() const;

  friend bool operator==(const BlockStructure&, const BlockStructure&) = default;

 private:
  friend BlockStructure validate_block_structure(std::span<const int> dims);

  std::vector<int> dims_;
  std::vector<int> offsets_;
  std::vector<int> owner_;
};

/// Throws EmptyPartition / NonPositiveDimension.
BlockStructure validate_block_structure(std::span<const int> dims);
BlockStructure uniform_blocks(int count, int dim);

/// D x T samples, one column per time step.
class SampleMatrix {
 public:
  explicit SampleMatrix(Matrix data);

  int dim() const { return static_cast<int>(data_.rows()); }
  int count() const { return static_cast<int>(data_.cols()); }
  const Matrix& data() const { return data_; }

 private:
  Matrix data_;
};

/// Headerless CSV, one time step per line.
void write_csv(const SampleMatrix& samples, std::ostream& out);
SampleMatrix read_csv(std::istream& in);
void write_csv_file(const SampleMatrix& samples, const std::string& path);
SampleMatrix read_csv_file(const std::string& path);

/// Causal FIR mixing H_0..H_L, each D_x x D_s.
class FirFilter {
 public:
  explicit FirFilter(std::vector<Matrix> taps);

  int order() const { return static_cast<int>(taps_.size()) - 1; }
  int rows() const { return static_cast<int>(taps_.front().rows()); }
  int cols() const { return static_cast<int>(taps_.front().cols()); }
  const Matrix& tap(int l) const { return taps_[l]; }
  const std::vector<Matrix>& taps() const { return taps_; }

 private:
  std::vector<Matrix> taps_;
};

class OrthonormalMap {
 public:
  static constexpr double kTolerance = 1e-10;

  /// Throws NotOrthonormal if max|W^T W - I| exceeds kTolerance.
  explicit OrthonormalMap(Matrix w);

  const Matrix& matrix() const { return w_; }
  int dim() const { return static_cast<int>(w_.rows()); }

 private:
  Matrix w_;
};

double orthonormality_error(const Matrix& w);

/// x' = Q (x - mean), Q = D^{-1/2} U^T from a truncated eigendecomposition.
struct Whitener {
  Vector mean;
  Matrix q;
  int kept_rank = 0;
  double eigenvalue_floor = 0.0;
};

/// Ground truth kept alongside an ISA task for evaluation only.
struct Provenance {
  Matrix mixing;                 // pre-reduction dim x blocks.total_dim()
  BlockStructure source_blocks;  // grouping of the concatenated source
};

struct IsaTask {
  SampleMatrix observation;
  BlockStructure blocks;
  std::optional<Whitener> whitener;
  std::optional<Provenance> provenance;
};

/// Checks the cross-field invariants of an IsaTask; throws DimMismatch.
IsaTask make_isa_task(SampleMatrix observation, BlockStructure blocks,
                      std::optional<Whitener> whitener = std::nullopt,
                      std::optional<Provenance> provenance = std::nullopt);

}  // namespace subdeconv
