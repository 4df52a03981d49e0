#include "subdeconv/config.hpp"

#include "subdeconv/error.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace subdeconv {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& msg) { fail(ErrorCode::ConfigError, msg); }

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) config_error(where + " must be an object");
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key)) config_error("unknown key '" + key + "' in " + where);
}

template <class T>
T get(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) config_error("missing '" + key + "' in " + where);
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    config_error("bad value for '" + key + "' in " + where);
  }
}

template <class T>
T get_or(const json& obj, const std::string& key, T fallback, const std::string& where) {
  return obj.contains(key) ? get<T>(obj, key, where) : fallback;
}

SourceSpec parse_source(const json& j, const std::filesystem::path& base) {
  const std::string where = "database entry";
  const auto kind = get<std::string>(j, "kind", where);
  try {
    if (kind == "geom3d") {
      check_keys(j, {"kind", "shape"}, where);
      return {Geom3D{parse_shape(get<std::string>(j, "shape", where))}};
    }
    if (kind == "letter") {
      check_keys(j, {"kind", "letter"}, where);
      const auto letter = get<std::string>(j, "letter", where);
      if (letter.size() != 1) config_error("letter must be a single character");
      return {letter_density(letter[0])};
    }
    if (kind == "image") {
      check_keys(j, {"kind", "path"}, where);
      std::filesystem::path p = get<std::string>(j, "path", where);
      if (p.is_relative()) p = base / p;
      return {read_pgm_file(p.string())};
    }
    if (kind == "all_k_independent") {
      check_keys(j, {"kind", "k"}, where);
      return {AllKIndependent{get<int>(j, "k", where)}};
    }
    if (kind == "spherical") {
      check_keys(j, {"kind", "dim"}, where);
      return {Spherical{get<int>(j, "dim", where)}};
    }
    if (kind == "uniform") {
      check_keys(j, {"kind", "dim"}, where);
      return {Uniform{get<int>(j, "dim", where)}};
    }
    if (kind == "stereo_ar") {
      check_keys(j, {"kind", "coefficients"}, where);
      const auto rows = get<std::vector<std::vector<double>>>(j, "coefficients", where);
      if (rows.empty()) config_error("stereo_ar coefficients are empty");
      Matrix f(rows.size(), rows.size());
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows.size()) config_error("stereo_ar coefficients must be square");
        for (std::size_t k = 0; k < rows.size(); ++k) f(i, k) = rows[i][k];
      }
      return {StereoAR{f}};
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    config_error(std::string("database entry '") + kind + "': " + e.what());
  }
  config_error("unknown source kind '" + kind + "'");
}

std::vector<SourceSpec> parse_database(const json& j, const std::filesystem::path& base) {
  if (!j.is_array() || j.empty()) config_error("'database' must be a non-empty array");
  std::vector<SourceSpec> db;
  for (const auto& entry : j) db.push_back(parse_source(entry, base));
  return db;
}

Nonlinearity parse_nonlinearity(const std::string& name) {
  if (name == "tanh") return Nonlinearity::Tanh;
  if (name == "cube") return Nonlinearity::Cube;
  if (name == "gauss") return Nonlinearity::Gauss;
  config_error("unknown ICA nonlinearity '" + name + "'");
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::ParseError, e.what());
  }
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int source_dim(const ExperimentConfig& cfg) {
  int ds = 0;
  for (const auto& s : cfg.database) ds += s.dim();
  return ds;
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.database.empty()) config_error("database is empty");
  if (cfg.samples < 2) config_error("T must be >= 2");
  if (cfg.runs < 1) config_error("runs must be >= 1");
  if (cfg.max_sweeps < 1) config_error("max_sweeps must be >= 1");
  if (cfg.ica.max_iter < 1 || cfg.ica.restarts < 0 || !(cfg.ica.tol > 0.0))
    config_error("invalid ica settings");
  if (cfg.mixing.type == MixingType::Ubssd) {
    if (cfg.mixing.order < 0) config_error("L must be >= 0");
    if (cfg.mixing.dx <= source_dim(cfg)) config_error("ubssd requires D_x > D_s");
  }
  try {
    validate(cfg.measure.kernel);
  } catch (const Error& e) {
    config_error(e.what());
  }
}

ExperimentConfig parse_config(const std::string& text, const std::string& base_dir) {
  const json j = parse_json(text);
  check_keys(j, {"database", "T", "mixing", "measure", "aggregation", "ica", "max_sweeps", "runs", "seed",
                 "output_dir"},
             "config");
  ExperimentConfig cfg;
  if (!j.contains("database")) config_error("missing 'database'");
  cfg.database = parse_database(j.at("database"), base_dir);
  cfg.samples = get<int>(j, "T", "config");
  cfg.runs = get_or(j, "runs", 1, "config");
  cfg.seed.value = get_or<std::uint64_t>(j, "seed", 0, "config");
  cfg.max_sweeps = get_or(j, "max_sweeps", 50, "config");
  cfg.output_dir = get_or<std::string>(j, "output_dir", ".", "config");

  if (j.contains("mixing")) {
    const auto& m = j.at("mixing");
    check_keys(m, {"type", "L", "D_x", "distribution"}, "mixing");
    const auto type = get_or<std::string>(m, "type", "isa", "mixing");
    if (type == "isa") {
      cfg.mixing.type = MixingType::Isa;
    } else if (type == "ubssd") {
      cfg.mixing.type = MixingType::Ubssd;
      cfg.mixing.order = get<int>(m, "L", "mixing");
      cfg.mixing.dx = get<int>(m, "D_x", "mixing");
    } else {
      config_error("unknown mixing type '" + type + "'");
    }
    const auto dist = get_or<std::string>(m, "distribution", "normal", "mixing");
    if (dist == "normal") cfg.mixing.distribution = MixingDistribution::Normal;
    else if (dist == "uniform01") cfg.mixing.distribution = MixingDistribution::Uniform01;
    else config_error("unknown mixing distribution '" + dist + "'");
  }

  if (j.contains("measure")) {
    const auto& m = j.at("measure");
    check_keys(m, {"name", "functions", "sigma", "kappa", "eta", "rank_cap"}, "measure");
    cfg.measure.measure = parse_measure(get_or<std::string>(m, "name", "jfd", "measure"));
    if (m.contains("functions")) {
      const auto names = get<std::vector<std::string>>(m, "functions", "measure");
      try {
        cfg.measure.functions = FunctionSet::from_names(names);
      } catch (const Error& e) {
        config_error(e.what());
      }
    }
    auto& k = cfg.measure.kernel;
    k.sigma = get_or(m, "sigma", k.sigma, "measure");
    k.kappa = get_or(m, "kappa", k.kappa, "measure");
    k.eta = get_or(m, "eta", k.eta, "measure");
    k.rank_cap = get_or(m, "rank_cap", k.rank_cap, "measure");
  }
  if (j.contains("aggregation"))
    cfg.measure.aggregation = parse_aggregation(get<std::string>(j, "aggregation", "config"));

  if (j.contains("ica")) {
    const auto& m = j.at("ica");
    check_keys(m, {"nonlinearity", "max_iter", "tol", "restarts"}, "ica");
    if (m.contains("nonlinearity")) cfg.ica.nonlinearity = parse_nonlinearity(get<std::string>(m, "nonlinearity", "ica"));
    cfg.ica.max_iter = get_or(m, "max_iter", cfg.ica.max_iter, "ica");
    cfg.ica.tol = get_or(m, "tol", cfg.ica.tol, "ica");
    cfg.ica.restarts = get_or(m, "restarts", cfg.ica.restarts, "ica");
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  const auto base = std::filesystem::path(path).parent_path();
  return parse_config(read_text(path), base.empty() ? "." : base.string());
}

GenSpec load_gen_spec(const std::string& path) {
  const json j = parse_json(read_text(path));
  check_keys(j, {"database", "T", "seed"}, "gen spec");
  auto base = std::filesystem::path(path).parent_path();
  if (base.empty()) base = ".";
  if (!j.contains("database")) config_error("missing 'database'");
  GenSpec spec;
  spec.database = parse_database(j.at("database"), base);
  spec.samples = get<int>(j, "T", "gen spec");
  if (spec.samples < 1) config_error("T must be >= 1");
  spec.seed.value = get_or<std::uint64_t>(j, "seed", 0, "gen spec");
  return spec;
}

}  // namespace subdeconv
