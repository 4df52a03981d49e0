// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any fails.

#include "oracles.hpp"

#include "subdeconv/config.hpp"
#include "subdeconv/datagen.hpp"
#include "subdeconv/dependency.hpp"
#include "subdeconv/evaluation.hpp"
#include "subdeconv/ica.hpp"
#include "subdeconv/permutation.hpp"
#include "subdeconv/pipeline.hpp"
#include "subdeconv/preprocess.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

using namespace subdeconv;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

ExperimentConfig config(const char* name) { return load_config(std::string(SUBDECONV_CONFIG_DIR) + "/" + name); }

std::vector<int> random_dims(Rng& rng, int count, int max_dim) {
  std::vector<int> dims;
  for (int m = 0; m < count; ++m) dims.push_back(1 + static_cast<int>(rng.below(max_dim)));
  return dims;
}

void shuffle(std::vector<int>& v, Rng& rng) {
  for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) std::swap(v[i], v[rng.below(i + 1)]);
}

// Criteria 1 and 2 share the all-k task.
struct AllK {
  RunSummary kcca, kgv, jfd;
  double seconds = 0.0;
};

const AllK& allk() {
  static const AllK result = [] {
    const auto start = std::chrono::steady_clock::now();
    AllK r;
    auto cfg = config("allk_isa_kgv.json");
    r.kgv = run_pipeline(cfg).summary;
    cfg.measure.measure = Measure::Kcca;
    r.kcca = run_pipeline(cfg).summary;
    cfg.measure.measure = Measure::Jfd;
    r.jfd = run_pipeline(cfg).summary;
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
  }();
  return result;
}

Outcome criterion1() {
  const auto& r = allk();
  const bool ok = r.kcca.failures == 0 && r.kgv.failures == 0 && r.kcca.median < 0.02 && r.kgv.median < 0.02;
  return {ok && r.seconds < 600,
          fmt("median r: kcca %.4f%%, kgv %.4f%% (limit 2%%), %.0f s", 100 * r.kcca.median, 100 * r.kgv.median,
              r.seconds)};
}

Outcome criterion2() {
  const auto& r = allk();
  return {r.jfd.failures == 0 && r.kgv.median <= r.jfd.median,
          fmt("median r: kgv %.4f%%, jfd %.4f%%", 100 * r.kgv.median, 100 * r.jfd.median)};
}

Outcome criterion3() {
  const auto start = std::chrono::steady_clock::now();
  const auto report = run_pipeline(config("abc_ubssd_jfd.json"));
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const auto& s = report.summary;
  bool sweeps_ok = true;
  for (const auto& run : report.runs) sweeps_ok = sweeps_ok && run.ok && run.sweeps >= 1 && run.sweeps <= 10;
  return {s.failures == 0 && s.median < 0.05 && sweeps_ok && seconds < 900,
          fmt("median r %.4f%% (limit 5%%), sweeps %d..%d, %.0f s", 100 * s.median, s.sweeps_min, s.sweeps_max,
              seconds)};
}

Outcome criterion4() {
  int checked = 0;
  bool ok = true;
  for (int ds : {4, 18}) {
    const auto blocks = uniform_blocks(ds / 2, 2);
    for (int l = 1; l <= 5; ++l) {
      const auto plan = plan_concat(2 * ds, ds, l, blocks);
      ok = ok && plan.isa_dim == 2 * ds * l && plan.isa_blocks.total_dim() == plan.isa_dim;
      ++checked;
    }
  }
  return {ok, fmt("%d (D_s, L) pairs", checked)};
}

Outcome criterion5() {
  Rng rng(RngSeed{5});
  double worst_perm = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto col_dims = random_dims(rng, 2 + static_cast<int>(rng.below(4)), 4);
    std::vector<int> perm(col_dims.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
    shuffle(perm, rng);
    std::vector<int> row_dims;
    for (int p : perm) row_dims.push_back(col_dims[p]);
    const auto rows = validate_block_structure(row_dims);
    const auto cols = validate_block_structure(col_dims);
    Matrix g = Matrix::Zero(rows.total_dim(), cols.total_dim());
    for (int i = 0; i < rows.count(); ++i)
      g.block(rows.offset(i), cols.offset(perm[i]), rows.dim(i), cols.dim(perm[i])) =
          random_orthogonal(rows.dim(i), split(RngSeed{50}, trial * 16 + i));
    worst_perm = std::max(worst_perm, amari_index(make_global_map(g, rows, cols)));
  }

  double worst_ones = 0.0;
  for (int m = 2; m <= 6; ++m)
    for (int d = 1; d <= 3; ++d) {
      const auto b = uniform_blocks(m, d);
      worst_ones = std::max(worst_ones, std::abs(amari_index(make_global_map(Matrix::Ones(m * d, m * d), b, b)) - 1.0));
    }

  double lo = 1.0, hi = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto dims = random_dims(rng, 2 + static_cast<int>(rng.below(4)), 4);
    const auto b = validate_block_structure(dims);
    const Matrix g = oracle::random_normal(b.total_dim(), b.total_dim(), 5000 + trial);
    const double r = amari_index(make_global_map(g, b, b));
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  return {worst_perm < 1e-10 && worst_ones < 1e-12 && lo >= 0.0 && hi <= 1.0,
          fmt("max r on block permutations %.2e, |r(ones) - 1| %.2e, random r in [%.3f, %.3f]", worst_perm,
              worst_ones, lo, hi)};
}

Outcome criterion6() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(RngSeed{6});
  double worst = 0.0;
  auto rel = [](double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); };
  for (int trial = 0; trial < 50; ++trial) {
    const int t = 4 + static_cast<int>(rng.below(13));
    const int m = 2 + static_cast<int>(rng.below(2));
    KernelConfig cfg;
    cfg.eta = 0.0;
    cfg.rank_cap = t;
    cfg.sigma = 0.5 + 1.5 * rng.uniform();
    cfg.kappa = 1e-3 * (1.0 + 9.0 * rng.uniform());
    std::vector<GramFactor> grams;
    std::vector<Matrix> dense;
    for (int c = 0; c < m; ++c) {
      const Matrix x = oracle::random_normal(1 + static_cast<int>(rng.below(3)), t, 600 + 10 * trial + c);
      grams.push_back(gram_factor(x, cfg));
      dense.push_back(oracle::centered_gram(x, cfg.sigma));
    }
    const double k2 = cfg.kappa2(t);
    const std::vector<Matrix> dense_pair(dense.begin(), dense.begin() + 2);
    worst = std::max(worst, rel(kcca_pair(grams[0], grams[1], cfg), oracle::kcca_max(dense_pair, k2)));
    worst = std::max(worst, rel(kcca_multi(grams, cfg), oracle::kcca_max(dense, k2)));
    worst = std::max(worst, rel(kgv_cost(grams, cfg), oracle::kgv(dense, k2)));
    worst = std::max(worst, rel(kc_multi(grams), oracle::kc_max(dense, kKcRidge)));
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {worst < 1e-6 && seconds < 60, fmt("max relative deviation %.2e over KCCA/KGV/KC", worst)};
}

Outcome criterion7() {
  Rng rng(RngSeed{7});
  double min_q = INFINITY, max_diag = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto blocks = validate_block_structure(random_dims(rng, 2 + static_cast<int>(rng.below(3)), 3));
    const int d = blocks.total_dim();
    const Matrix b = oracle::random_normal(d, d + static_cast<int>(rng.below(3)), 700 + trial);
    const Matrix sigma = b * b.transpose();
    min_q = std::min(min_q, generalized_variance(sigma, blocks));
    Matrix diag = Matrix::Zero(d, d);
    for (int m = 0; m < blocks.count(); ++m)
      diag.block(blocks.offset(m), blocks.offset(m), blocks.dim(m), blocks.dim(m)) =
          sigma.block(blocks.offset(m), blocks.offset(m), blocks.dim(m), blocks.dim(m));
    max_diag = std::max(max_diag, std::abs(generalized_variance(diag, blocks)));
  }
  return {min_q >= 0.0 && max_diag < 1e-10, fmt("min Q %.3e, max |Q| on block-diagonal %.2e", min_q, max_diag)};
}

Outcome criterion8() {
  const auto start = std::chrono::steady_clock::now();
  const int t = 100000;
  const SampleMatrix gauss(oracle::random_normal(3, t, 8));
  const auto cube = gen_component(SourceSpec{Uniform{2}}, t, RngSeed{8});
  const auto g = w_epi_check(gauss, 100, RngSeed{81});
  const auto u = w_epi_check(cube, 100, RngSeed{82});
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {g.pass_fraction >= 0.95 && u.pass_fraction >= 0.95 && seconds < 300,
          fmt("pass fraction: gaussian d=3 %.2f, uniform cube d=2 %.2f, %.0f s", g.pass_fraction, u.pass_fraction,
              seconds)};
}

Outcome criterion9() {
  Rng rng(RngSeed{9});
  double worst = 0.0;
  for (int instance = 0; instance < 20; ++instance) {
    const auto blocks = validate_block_structure(random_dims(rng, 1 + static_cast<int>(rng.below(3)), 3));
    const int ds = blocks.total_dim();
    const int dx = ds + 1 + static_cast<int>(rng.below(4));
    const int l = static_cast<int>(rng.below(4));
    const auto plan = plan_concat(dx, ds, l, blocks);
    const auto h = gen_random_fir(dx, ds, l, split(RngSeed{90}, instance));
    const SampleMatrix s(oracle::random_normal(ds, 50, 900 + instance));
    const Matrix product = build_concat_mixing(h, plan) * stack_source_lags(s, plan);
    const Matrix big_x = temporal_concat(apply_fir(h, s), plan).data();
    // Row i*L'+r, column c holds x_i(c + L' - 1 - r) = sum_l H_l(i, :) s(c + L' - 1 - r + L - l).
    Matrix expected = Matrix::Zero(dx * plan.depth, s.count() - l - plan.depth + 1);
    for (int c = 0; c < expected.cols(); ++c)
      for (int i = 0; i < dx; ++i)
        for (int r = 0; r < plan.depth; ++r)
          for (int k = 0; k <= l; ++k)
            for (int j = 0; j < ds; ++j)
              expected(i * plan.depth + r, c) += h.tap(k)(i, j) * s.data()(j, c + plan.depth - 1 - r + l - k);
    if (product.cols() != expected.cols() || big_x.cols() != expected.cols()) return {false, "shape mismatch"};
    worst = std::max(worst, (product - expected).cwiseAbs().maxCoeff());
    worst = std::max(worst, (big_x - expected).cwiseAbs().maxCoeff());
  }
  return {worst < 1e-12, fmt("max |X - A S| %.2e", worst)};
}

Outcome criterion10() {
  const auto start = std::chrono::steady_clock::now();
  const auto points = run_curve(config("abc_ubssd_jfd.json"), {2000, 6000, 20000});
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const auto c = fit_power_law(points);
  std::string detail = "mean r:";
  for (const auto& p : points) detail += fmt(" T=%d %.4f%%", p.samples, 100 * p.summary.mean);
  detail += c ? fmt(", c %.3f", *c) : std::string(", c undefined");
  detail += fmt(", %.0f s", seconds);
  return {c && *c > 0.0 && seconds < 1200, detail};
}

// Greedy and exhaustive grouping of real ICA outputs.
Outcome criterion11() {
  const auto start = std::chrono::steady_clock::now();
  const std::vector<Shape> shapes(geom3d_catalog().begin(), geom3d_catalog().end());
  const char letters[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZ";
  int equal = 0, below = 0, total = 0;
  for (int layout = 0; layout < 2; ++layout) {
    for (int instance = 0; instance < 50; ++instance) {
      const RngSeed seed = split(RngSeed{11}, layout * 100 + instance);
      Rng pick(split(seed, 3));
      std::vector<SourceSpec> specs;
      if (layout == 0) {
        for (int m = 0; m < 2; ++m) specs.push_back({Geom3D{shapes[pick.below(shapes.size())]}});
      } else {
        for (int m = 0; m < 3; ++m) specs.push_back({letter_density(letters[pick.below(26)])});
      }
      const auto src = gen_source(specs, 5000, split(seed, 0));
      const Matrix a = random_orthogonal(6, split(seed, 1));
      const SampleMatrix x(a * src.samples.data());
      const auto white = apply_whitener(fit_whitener(x, 6), x);
      IcaConfig ica;
      ica.seed = split(seed, 2);
      const auto e = apply_whitener(
          Whitener{Vector::Zero(6), run_ica(white, ica).demixing.matrix(), 6, 0.0}, white);
      JfdCost cost(e.data(), src.blocks, FunctionSet{});
      const double greedy = greedy_sweeps(e, src.blocks, cost).final_cost;
      const double best = exhaustive_search(e, src.blocks, cost).final_cost;
      const double scale = 1e-9 * std::max(std::abs(best), 1e-300);
      if (std::abs(greedy - best) <= scale) ++equal;
      if (greedy < best - scale) ++below;
      ++total;
    }
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {below == 0 && equal >= 0.8 * total && seconds < 600,
          fmt("greedy = exhaustive on %d/%d, below it on %d, %.0f s", equal, total, below, seconds)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"all-k ISA, KCCA and KGV median Amari index < 2%", criterion1},
      {"all-k ISA, KGV median <= JFD median", criterion2},
      {"uBSSD letters, JFD median < 5%, 1..10 sweeps", criterion3},
      {"D_isa = 2 D_s L for D_x = 2 D_s", criterion4},
      {"Amari index axioms", criterion5},
      {"factored kernel measures match dense pencils", criterion6},
      {"generalized variance >= 0, = 0 on block-diagonal", criterion7},
      {"w-EPI on gaussian and uniform sources", criterion8},
      {"temporal concatenation X = A S", criterion9},
      {"power law slope c > 0", criterion10},
      {"greedy vs exhaustive grouping", criterion11},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
