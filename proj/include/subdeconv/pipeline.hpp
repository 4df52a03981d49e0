#pragma once

#include "subdeconv/config.hpp"
#include "subdeconv/model.hpp"

#include <optional>
#include <string>
#include <vector>

namespace subdeconv {

struct RunResult {
  int index = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;  // "<code>: <message>" when !ok
  double amari = 0.0;
  int sweeps = 0;
  bool sweeps_converged = false;
  bool ica_converged = false;
  int ica_iterations = 0;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  double wall_seconds = 0.0;
  Matrix global;  // G = P W Q A
};

struct RunSummary {
  int runs = 0;
  int failures = 0;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for a single run
  double min = 0.0;
  double max = 0.0;
  double median = 0.0;
  int sweeps_min = 0;
  double sweeps_mean = 0.0;
  int sweeps_max = 0;
  int best_run = -1;
};

struct RunReport {
  std::vector<RunResult> runs;
  RunSummary summary;
};

/// One seeded end-to-end run: source, mixing, reduction, whitening, ICA,
/// greedy grouping and Amari index. Errors are recorded, not thrown.
RunResult run_once(const ExperimentConfig& cfg, int index);

/// All runs with up to `jobs` concurrent workers; the result does not
/// depend on `jobs`.
RunReport run_pipeline(const ExperimentConfig& cfg, int jobs = 1);

RunSummary summarize(const std::vector<RunResult>& runs);

std::string report_json(const ExperimentConfig& cfg, const RunSummary& summary);
/// One JSON object per line, including wall time.
std::string runs_jsonl(const std::vector<RunResult>& runs);

/// Writes report.json, runs.jsonl and hinton.csv (best run) into `dir`.
void write_outputs(const ExperimentConfig& cfg, const RunReport& report, const std::string& dir);

struct CurvePoint {
  int samples = 0;
  RunSummary summary;
};

/// c in r(T) ~ T^-c, least squares on log-log scale from the largest mean
/// error onward; empty with fewer than two usable points.
std::optional<double> fit_power_law(const std::vector<CurvePoint>& points);

/// CSV: T,mean_r,std_r,min_r,max_r,mean_sweeps,c (c repeated per row, empty if undefined).
std::string curve_csv(const std::vector<CurvePoint>& points);

std::vector<CurvePoint> run_curve(const ExperimentConfig& cfg, const std::vector<int>& grid, int jobs = 1);

}  // namespace subdeconv
