#pragma once

#include "subdeconv/datagen.hpp"
#include "subdeconv/dependency.hpp"
#include "subdeconv/ica.hpp"
#include "subdeconv/rng.hpp"

#include <string>
#include <vector>

namespace subdeconv {

enum class MixingType { Isa, Ubssd };

struct MixingConfig {
  MixingType type = MixingType::Isa;
  int order = 0;  // L
  int dx = 0;     // observation channels for ubssd
  MixingDistribution distribution = MixingDistribution::Normal;
};

struct ExperimentConfig {
  std::vector<SourceSpec> database;
  int samples = 0;  // T of the ISA task handed to ICA
  MixingConfig mixing;
  DependencyMeasure measure;
  IcaConfig ica;
  int max_sweeps = 50;
  int runs = 1;
  RngSeed seed{};
  std::string output_dir = ".";
};

int source_dim(const ExperimentConfig& cfg);

/// Throws ConfigError on any violated invariant.
void validate(const ExperimentConfig& cfg);

/// JSON config. Relative image paths resolve against `base_dir`.
/// Throws ConfigError (and ParseError for malformed JSON).
ExperimentConfig parse_config(const std::string& text, const std::string& base_dir = ".");
ExperimentConfig load_config(const std::string& path);

/// Source list of a generator spec file: {"database": [...], "T": n, "seed": s}.
struct GenSpec {
  std::vector<SourceSpec> database;
  int samples = 0;
  RngSeed seed{};
};
GenSpec load_gen_spec(const std::string& path);

}  // namespace subdeconv
