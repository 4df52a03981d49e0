// Serial reference vs OpenMP versions of the hot kernels.
// Run with OMP_NUM_THREADS to vary the worker count.

#include "subdeconv/kernels.hpp"
#include "subdeconv/rng.hpp"

#include <benchmark/benchmark.h>

using namespace subdeconv;
using kernels::Backend;

namespace {

Matrix random_matrix(int rows, int cols, std::uint64_t seed) {
  Rng rng(RngSeed{seed});
  Matrix m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = rng.normal();
  return m;
}

Backend backend_of(const benchmark::State& state) {
  return state.range(0) == 0 ? Backend::Serial : Backend::Parallel;
}

void BM_CenteredCovariance(benchmark::State& state) {
  const Matrix f = random_matrix(16, static_cast<int>(state.range(1)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::centered_covariance(f, backend_of(state)));
  state.SetItemsProcessed(state.iterations() * state.range(1));
}

void BM_GaussianKernelColumn(benchmark::State& state) {
  const Matrix x = random_matrix(2, static_cast<int>(state.range(1)), 2);
  std::vector<double> out(x.cols());
  for (auto _ : state) {
    kernels::gaussian_kernel_column(x, 7, 1.0, out, backend_of(state));
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(1));
}

void BM_FirConvolve(benchmark::State& state) {
  std::vector<Matrix> taps;
  for (int l = 0; l <= 3; ++l) taps.push_back(random_matrix(8, 4, 10 + l));
  const Matrix s = random_matrix(4, static_cast<int>(state.range(1)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::fir_convolve(taps, s, backend_of(state)));
  state.SetItemsProcessed(state.iterations() * state.range(1));
}

void BM_FixedPointMoments(benchmark::State& state) {
  const Matrix x = random_matrix(8, static_cast<int>(state.range(1)), 4);
  const Matrix w = Matrix::Identity(8, 8);
  for (auto _ : state)
    benchmark::DoNotOptimize(kernels::fixed_point_moments(w, x, kernels::Nonlinearity::Tanh, backend_of(state)));
  state.SetItemsProcessed(state.iterations() * state.range(1));
}

// Arg 0: 0 serial, 1 OpenMP. Arg 1: number of samples.
void sizes(benchmark::internal::Benchmark* b) {
  for (int backend : {0, 1})
    for (int t : {5'000, 20'000, 100'000}) b->Args({backend, t});
}

}  // namespace

BENCHMARK(BM_CenteredCovariance)->Apply(sizes);
BENCHMARK(BM_GaussianKernelColumn)->Apply(sizes);
BENCHMARK(BM_FirConvolve)->Apply(sizes);
BENCHMARK(BM_FixedPointMoments)->Apply(sizes);

BENCHMARK_MAIN();
