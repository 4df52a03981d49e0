#include "subdeconv/config.hpp"
#include "subdeconv/datagen.hpp"
#include "subdeconv/error.hpp"
#include "subdeconv/pipeline.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace subdeconv;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitAllFailed = 3;

std::vector<int> parse_grid(const std::string& text) {
  std::vector<int> grid;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(cell, &used);
      if (used != cell.size() || v < 1 || v != static_cast<int>(v)) throw std::invalid_argument(cell);
      grid.push_back(static_cast<int>(v));
    } catch (const std::exception&) {
      fail(ErrorCode::ConfigError, "bad --T entry '" + cell + "'");
    }
  }
  if (grid.empty()) fail(ErrorCode::ConfigError, "--T is empty");
  return grid;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Blind subspace deconvolution experiments"};
  app.require_subcommand(1);

  std::string config_path, out_dir, grid_text, spec_path, csv_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> runs;
  int jobs = 1;

  auto* run = app.add_subcommand("run", "Run the seeded pipeline and write report.json, runs.jsonl, hinton.csv");
  run->add_option("--config", config_path, "JSON experiment config")->required();
  run->add_option("--seed", seed, "Override the master seed");
  run->add_option("--runs", runs, "Override the number of runs");
  run->add_option("--jobs", jobs, "Concurrent runs")->check(CLI::PositiveNumber);
  run->add_option("--out", out_dir, "Output directory (default: config output_dir)");

  auto* curve = app.add_subcommand("curve", "Amari index over a grid of sample sizes, written to curve.csv");
  curve->add_option("--config", config_path, "JSON experiment config")->required();
  curve->add_option("--T", grid_text, "Comma-separated sample sizes, e.g. 1000,10000")->required();
  curve->add_option("--seed", seed, "Override the master seed");
  curve->add_option("--runs", runs, "Override the number of runs");
  curve->add_option("--jobs", jobs, "Concurrent runs")->check(CLI::PositiveNumber);
  curve->add_option("--out", out_dir, "Output directory (default: config output_dir)");

  auto* gen = app.add_subcommand("gen", "Generate a standardized source and write it as CSV");
  gen->add_option("--spec", spec_path, "JSON source spec")->required();
  gen->add_option("--out", csv_path, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }

  try {
    if (gen->parsed()) {
      const GenSpec spec = load_gen_spec(spec_path);
      const Source src = gen_source(spec.database, spec.samples, spec.seed);
      write_csv_file(src.samples, csv_path);
      return 0;
    }

    ExperimentConfig cfg = load_config(config_path);
    if (seed) cfg.seed.value = *seed;
    if (runs) cfg.runs = *runs;
    validate(cfg);
    const std::string dir = out_dir.empty() ? cfg.output_dir : out_dir;

    if (run->parsed()) {
      const RunReport report = run_pipeline(cfg, jobs);
      write_outputs(cfg, report, dir);
      const auto& s = report.summary;
      std::cout << "runs " << s.runs << ", failures " << s.failures << ", amari mean " << s.mean << " median "
                << s.median << ", sweeps " << s.sweeps_min << ".." << s.sweeps_max << "\n";
      for (const auto& r : report.runs)
        if (!r.ok) std::cerr << "run " << r.index << " failed: " << r.error << "\n";
      return s.failures == s.runs ? kExitAllFailed : 0;
    }

    const auto points = run_curve(cfg, parse_grid(grid_text), jobs);
    std::filesystem::create_directories(dir);
    const auto path = (std::filesystem::path(dir) / "curve.csv").string();
    std::ofstream out(path);
    if (!out) fail(ErrorCode::IoError, "cannot open " + path);
    out << curve_csv(points);
    std::cout << curve_csv(points);
    for (const auto& p : points)
      if (p.summary.failures == p.summary.runs) return kExitAllFailed;
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    switch (e.code()) {
      case ErrorCode::ConfigError:
      case ErrorCode::ParseError:
      case ErrorCode::UnknownShape:
      case ErrorCode::IoError:
        return kExitConfig;
      default:
        return 1;
    }
  }
}
