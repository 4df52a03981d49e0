#pragma once

#include <cstdint>
#include <random>

namespace subdeconv {

// Seed for a deterministic stream. Child streams are derived with split(),
// which mixes the parent seed and a stream index through SplitMix64, so
// sibling streams never overlap in practice and never depend on seed+i.
struct RngSeed {
  std::uint64_t value = 0;
};

std::uint64_t splitmix64(std::uint64_t x);
RngSeed split(RngSeed parent, std::uint64_t stream);

/// Portable generator: std::mt19937_64 is bit-specified by the standard, and
/// the distributions below are implemented here (the std:: ones are not
/// reproducible across library vendors).
class Rng {
 public:
  explicit Rng(RngSeed seed);

  std::uint64_t next() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer on [0, n).
  std::uint64_t below(std::uint64_t n);
  /// Standard normal via Box-Muller.
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace subdeconv
