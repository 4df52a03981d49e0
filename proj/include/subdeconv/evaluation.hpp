#pragma once

#include "subdeconv/model.hpp"
#include "subdeconv/rng.hpp"

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace subdeconv {

/// G = W A with its rows grouped like the estimate and columns like the source.
struct GlobalMap {
  Matrix g;
  BlockStructure blocks_row;
  BlockStructure blocks_col;
};

/// Throws DimMismatch / InvalidSamples.
GlobalMap make_global_map(Matrix g, BlockStructure blocks_row, BlockStructure blocks_col);

/// M x M matrix of absolute block sums g^{ij}.
Matrix block_mass(const GlobalMap& g);

/// Normalized Amari error in [0, 1]; zero exactly on block-permutation
/// matrices. Throws SingleBlock for M < 2.
double amari_index(const GlobalMap& g);

struct BlockPermutationCheck {
  bool ok = false;
  std::vector<int> assignment;  // row block i -> column block assignment[i]; empty unless ok
};

/// Each block row and column must hold exactly one block mass above
/// tol * max g^{ij}, forming a bijection between blocks of equal size.
BlockPermutationCheck is_block_permutation(const GlobalMap& g, double tol);

/// |G| / max|G| as CSV: a header of column indices, then one line per row
/// with 6 decimals.
void write_hinton(const Matrix& g, std::ostream& out);
void write_hinton_file(const Matrix& g, const std::string& path);
Matrix read_hinton(std::istream& in);

/// Kozachenko-Leonenko k-NN differential entropy (nats) of 1-D samples.
/// Throws TooFewSamples below 100 samples and DegenerateSamples on zero spread.
double entropy_1d(std::span<const double> samples, int k = 3);

struct WEpiResult {
  double pass_fraction = 0.0;
  std::vector<double> margins;    // H(w.u) - sum w_i^2 H(u_i), one per direction
  std::vector<double> tolerances; // 3 standard errors of each margin
};

/// Tests H(sum w_i u_i) >= sum w_i^2 H(u_i) - eps along random unit w.
/// eps is three standard errors estimated from 10 disjoint subsamples.
WEpiResult w_epi_check(const SampleMatrix& component, int directions, RngSeed seed, int k = 3);

}  // namespace subdeconv
