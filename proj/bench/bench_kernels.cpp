// Parallel kernels against their serial references.

#include "equimorse/cartan.hpp"
#include "equimorse/catalog.hpp"
#include "equimorse/parallel.hpp"
#include "equimorse/spectral.hpp"

#include <benchmark/benchmark.h>

#include <map>

using namespace equimorse;

namespace {

const SparseMatrix& laplacian(int grid) {
  static std::map<int, SparseMatrix> cache;
  auto it = cache.find(grid);
  if (it == cache.end()) {
    const BackendMatrices b = make_case("sphere_height", {{"grid", grid}}).backend();
    SparseMatrix m = build_deformed_laplacian(b, 8.0, 2).matrix;
    m.makeCompressed();
    it = cache.emplace(grid, std::move(m)).first;
  }
  return it->second;
}

void BM_SpmvSerial(benchmark::State& state) {
  const SparseMatrix& a = laplacian(static_cast<int>(state.range(0)));
  const Vector x = Vector::Ones(a.cols());
  Vector y;
  for (auto _ : state) {
    spmv_serial(a, x, y);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * a.nonZeros());
}

void BM_SpmvParallel(benchmark::State& state) {
  const SparseMatrix& a = laplacian(static_cast<int>(state.range(0)));
  const Vector x = Vector::Ones(a.cols());
  Vector y;
  for (auto _ : state) {
    spmv(a, x, y);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * a.nonZeros());
}

void BM_SpmmSerial(benchmark::State& state) {
  const SparseMatrix& a = laplacian(static_cast<int>(state.range(0)));
  const Matrix x = Matrix::Ones(a.cols(), 20);
  Matrix y;
  for (auto _ : state) {
    spmm_serial(a, x, y);
    benchmark::DoNotOptimize(y.data());
  }
}

void BM_SpmmParallel(benchmark::State& state) {
  const SparseMatrix& a = laplacian(static_cast<int>(state.range(0)));
  const Matrix x = Matrix::Ones(a.cols(), 20);
  Matrix y;
  for (auto _ : state) {
    spmm(a, x, y);
    benchmark::DoNotOptimize(y.data());
  }
}

// One Laplacian spectrum per job, the unit of work of betti_numbers and sweep_s.
void spectrum_jobs(bool parallel) {
  static const BackendMatrices b = make_case("sphere_height", {{"grid", 128}}).backend();
  const std::vector<double> s = {0, 4, 8, 16};
  std::vector<double> low(s.size());
  auto job = [&](int i) {
    Eigen::setNbThreads(1);
    low[i] = laplacian_spectrum(b, 2, s[i], 10).eigenvalues.back();
  };
  if (parallel)
    run_jobs(static_cast<int>(s.size()), job);
  else
    run_jobs_serial(static_cast<int>(s.size()), job);
  benchmark::DoNotOptimize(low.data());
}

void BM_SpectrumJobsSerial(benchmark::State& state) {
  for (auto _ : state) spectrum_jobs(false);
}

void BM_SpectrumJobsParallel(benchmark::State& state) {
  for (auto _ : state) spectrum_jobs(true);
}

}  // namespace

BENCHMARK(BM_SpmvSerial)->Arg(256)->Arg(4096);
BENCHMARK(BM_SpmvParallel)->Arg(256)->Arg(4096);
BENCHMARK(BM_SpmmSerial)->Arg(1024);
BENCHMARK(BM_SpmmParallel)->Arg(1024);
BENCHMARK(BM_SpectrumJobsSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SpectrumJobsParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
