#include "subdeconv/pipeline.hpp"

#include "subdeconv/datagen.hpp"
#include "subdeconv/error.hpp"
#include "subdeconv/evaluation.hpp"
#include "subdeconv/ica.hpp"
#include "subdeconv/permutation.hpp"
#include "subdeconv/preprocess.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

namespace subdeconv {

using nlohmann::json;

namespace {

struct MixedTask {
  SampleMatrix observation;
  BlockStructure blocks;
  Matrix mixing;
};

MixedTask mix(const ExperimentConfig& cfg, RngSeed seed) {
  const auto& m = cfg.mixing;
  if (m.type == MixingType::Isa) {
    Source src = gen_source(cfg.database, cfg.samples, split(seed, 0));
    Matrix a = random_orthogonal(src.samples.dim(), split(seed, 1));
    SampleMatrix x(a * src.samples.data());
    return {std::move(x), src.blocks, std::move(a)};
  }
  // Longer source so that the concatenated task keeps exactly T samples.
  std::vector<int> dims;
  for (const auto& s : cfg.database) dims.push_back(s.dim());
  const ConcatPlan plan = plan_concat(m.dx, source_dim(cfg), m.order, validate_block_structure(dims));
  Source src = gen_source(cfg.database, cfg.samples + m.order + plan.depth - 1, split(seed, 0));
  const FirFilter h = gen_random_fir(m.dx, plan.ds, m.order, split(seed, 1), m.distribution);
  SampleMatrix x = temporal_concat(apply_fir(h, src.samples), plan);
  return {std::move(x), plan.isa_blocks, build_concat_mixing(h, plan)};
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

RunResult run_once(const ExperimentConfig& cfg, int index) {
  const auto start = std::chrono::steady_clock::now();
  RunResult r;
  r.index = index;
  const RngSeed seed = split(cfg.seed, static_cast<std::uint64_t>(index));
  r.seed = seed.value;
  try {
    MixedTask task = mix(cfg, seed);
    const int d = task.blocks.total_dim();
    const Whitener wh = fit_whitener(task.observation, d);
    const SampleMatrix xw = apply_whitener(wh, task.observation);

    IcaConfig ica = cfg.ica;
    ica.seed = split(seed, 2);
    const IcaResult ir = run_ica(xw, ica);
    r.ica_converged = ir.converged;
    r.ica_iterations = ir.iterations;

    const SampleMatrix y(ir.demixing.matrix() * xw.data());
    const PermutationResult pr = greedy_sweeps(y, task.blocks, cfg.measure, cfg.max_sweeps);
    r.sweeps = pr.sweeps;
    r.sweeps_converged = pr.converged;
    r.initial_cost = pr.initial_cost;
    r.final_cost = pr.final_cost;

    r.global = pr.matrix() * ir.demixing.matrix() * wh.q * task.mixing;
    r.amari = amari_index(make_global_map(r.global, task.blocks, task.blocks));
    r.ok = true;
  } catch (const Error& e) {
    r.error = std::string(to_string(e.code())) + ": " + e.what();
  } catch (const std::exception& e) {
    r.error = std::string("internal: ") + e.what();
  }
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

RunReport run_pipeline(const ExperimentConfig& cfg, int jobs) {
  validate(cfg);
  RunReport report;
  report.runs.resize(cfg.runs);
  const int workers = std::clamp(jobs, 1, cfg.runs);
  std::atomic<int> next{0};
  auto work = [&] {
    for (int i = next++; i < cfg.runs; i = next++) report.runs[i] = run_once(cfg, i);
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  report.summary = summarize(report.runs);
  return report;
}

RunSummary summarize(const std::vector<RunResult>& runs) {
  RunSummary s;
  s.runs = static_cast<int>(runs.size());
  std::vector<double> r;
  std::vector<int> sweeps;
  for (const auto& run : runs) {
    if (!run.ok) {
      ++s.failures;
      continue;
    }
    r.push_back(run.amari);
    sweeps.push_back(run.sweeps);
    if (s.best_run < 0 || run.amari < runs[s.best_run].amari) s.best_run = run.index;
  }
  if (r.empty()) return s;
  const double n = static_cast<double>(r.size());
  for (double v : r) s.mean += v;
  s.mean /= n;
  if (r.size() > 1) {
    for (double v : r) s.stddev += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(s.stddev / (n - 1));
  }
  s.min = *std::min_element(r.begin(), r.end());
  s.max = *std::max_element(r.begin(), r.end());
  s.median = median_of(r);
  s.sweeps_min = *std::min_element(sweeps.begin(), sweeps.end());
  s.sweeps_max = *std::max_element(sweeps.begin(), sweeps.end());
  for (int v : sweeps) s.sweeps_mean += v;
  s.sweeps_mean /= n;
  return s;
}

std::string report_json(const ExperimentConfig& cfg, const RunSummary& s) {
  json j;
  j["T"] = cfg.samples;
  j["mixing"] = cfg.mixing.type == MixingType::Isa ? "isa" : "ubssd";
  if (cfg.mixing.type == MixingType::Ubssd) {
    j["L"] = cfg.mixing.order;
    j["D_x"] = cfg.mixing.dx;
  }
  j["D_s"] = source_dim(cfg);
  j["measure"] = measure_name(cfg.measure.measure);
  j["aggregation"] = aggregation_name(cfg.measure.aggregation);
  j["seed"] = cfg.seed.value;
  j["runs"] = s.runs;
  j["failures"] = s.failures;
  j["best_run"] = s.best_run;
  j["amari"] = {{"mean", s.mean}, {"std", s.stddev}, {"min", s.min},
                {"max", s.max},   {"median", s.median}};
  j["sweeps"] = {{"min", s.sweeps_min}, {"mean", s.sweeps_mean}, {"max", s.sweeps_max}};
  return j.dump(2) + "\n";
}

std::string runs_jsonl(const std::vector<RunResult>& runs) {
  std::string out;
  for (const auto& r : runs) {
    json j;
    j["run"] = r.index;
    j["seed"] = r.seed;
    j["ok"] = r.ok;
    if (r.ok) {
      j["amari_index"] = r.amari;
      j["sweeps"] = r.sweeps;
      j["sweeps_converged"] = r.sweeps_converged;
      j["ica_converged"] = r.ica_converged;
      j["ica_iterations"] = r.ica_iterations;
      j["initial_cost"] = r.initial_cost;
      j["final_cost"] = r.final_cost;
    } else {
      j["error"] = r.error;
    }
    j["wall_seconds"] = r.wall_seconds;
    out += j.dump() + "\n";
  }
  return out;
}

void write_outputs(const ExperimentConfig& cfg, const RunReport& report, const std::string& dir) {
  std::filesystem::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& text) {
    const auto path = (std::filesystem::path(dir) / name).string();
    std::ofstream out(path);
    if (!out) fail(ErrorCode::IoError, "cannot open " + path);
    out << text;
  };
  write("report.json", report_json(cfg, report.summary));
  write("runs.jsonl", runs_jsonl(report.runs));
  if (report.summary.best_run >= 0)
    write_hinton_file(report.runs[report.summary.best_run].global,
                      (std::filesystem::path(dir) / "hinton.csv").string());
}

std::optional<double> fit_power_law(const std::vector<CurvePoint>& points) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& p : points)
    if (p.samples > 0 && p.summary.mean > 0.0 && p.summary.runs > p.summary.failures)
      pts.emplace_back(std::log(static_cast<double>(p.samples)), std::log(p.summary.mean));
  std::sort(pts.begin(), pts.end());
  if (pts.size() < 2) return std::nullopt;
  // The declining segment starts at the largest error.
  std::size_t peak = 0;
  for (std::size_t i = 1; i < pts.size(); ++i)
    if (pts[i].second > pts[peak].second) peak = i;
  if (pts.size() - peak < 2) return std::nullopt;
  double mx = 0.0, my = 0.0;
  const double n = static_cast<double>(pts.size() - peak);
  for (std::size_t i = peak; i < pts.size(); ++i) {
    mx += pts[i].first;
    my += pts[i].second;
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = peak; i < pts.size(); ++i) {
    sxy += (pts[i].first - mx) * (pts[i].second - my);
    sxx += (pts[i].first - mx) * (pts[i].first - mx);
  }
  if (sxx == 0.0) return std::nullopt;
  return -sxy / sxx;
}

std::string curve_csv(const std::vector<CurvePoint>& points) {
  const auto c = fit_power_law(points);
  std::ostringstream out;
  out << "T,mean_r,std_r,min_r,max_r,mean_sweeps,c\n";
  for (const auto& p : points) {
    const auto& s = p.summary;
    out << p.samples << ',' << fmt_double(s.mean) << ',' << fmt_double(s.stddev) << ',' << fmt_double(s.min)
        << ',' << fmt_double(s.max) << ',' << fmt_double(s.sweeps_mean) << ',' << (c ? fmt_double(*c) : "")
        << '\n';
  }
  return out.str();
}

std::vector<CurvePoint> run_curve(const ExperimentConfig& cfg, const std::vector<int>& grid, int jobs) {
  std::vector<CurvePoint> points;
  for (int t : grid) {
    ExperimentConfig c = cfg;
    c.samples = t;
    points.push_back({t, run_pipeline(c, jobs).summary});
  }
  return points;
}

}  // namespace subdeconv
