#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "bhtbp/baselines.hpp"
#include "bhtbp/bench.hpp"
#include "bhtbp/bp.hpp"
#include "bhtbp/density.hpp"
#include "bhtbp/model.hpp"

namespace {

using namespace bhtbp;

ContinuousDensity random_density(std::size_t points, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ContinuousDensity d(Grid::symmetric(1.0, points));
  for (double& v : d.mass) v = u(rng);
  return normalize(d);
}

void BM_Convolve(benchmark::State& state) {
  Rng rng(1);
  const auto points = static_cast<std::size_t>(state.range(0));
  const auto a = random_density(points, rng);
  const auto b = random_density(points, rng);
  for (auto _ : state) benchmark::DoNotOptimize(convolve(a, b));
}
BENCHMARK(BM_Convolve)->Arg(129)->Arg(513)->Arg(1025)->Arg(2049);

struct Instance {
  SparseBernoulliMatrix phi;
  DenseMatrix dense;
  SparseSignal x;
  Measurement meas;
  Measurement dense_meas;
};

Instance make_instance(std::size_t m) {
  Rng rng(7);
  Instance inst;
  inst.phi = gen_sparse_matrix(128, m, 3, rng);
  inst.dense = gen_gaussian_matrix(128, m, 3.0, rng);
  inst.x = gen_signal({128, 12, 10.0, 0.2, 3.0}, rng);
  inst.meas = measure(inst.phi, inst.x, Snr::decibels(30), rng);
  inst.dense_meas = measure(inst.dense, inst.x, Snr::decibels(30), rng);
  return inst;
}

void BM_BpDecode(benchmark::State& state) {
  const auto inst = make_instance(static_cast<std::size_t>(state.range(0)));
  const BpConfig cfg;
  const auto prior = make_prior(12.0 / 128.0, 10.0, cfg);
  for (auto _ : state) benchmark::DoNotOptimize(run(inst.phi, inst.meas, prior, cfg));
}
BENCHMARK(BM_BpDecode)->Arg(38)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_Omp(benchmark::State& state) {
  const auto inst = make_instance(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(omp(inst.dense, inst.dense_meas.z, 12));
}
BENCHMARK(BM_Omp)->Arg(38)->Arg(64)->Arg(128)->Unit(benchmark::kMicrosecond);

void BM_Lasso(benchmark::State& state) {
  const auto inst = make_instance(static_cast<std::size_t>(state.range(0)));
  const LassoConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(lasso(inst.dense, inst.dense_meas.z, cfg, inst.dense_meas.noise_std));
  }
}
BENCHMARK(BM_Lasso)->Arg(38)->Arg(64)->Arg(128)->Unit(benchmark::kMicrosecond);

void BM_Trial(benchmark::State& state) {
  ExperimentConfig c;
  const PointSpec point{128, 12, Snr::decibels(30), 64, static_cast<Algorithm>(state.range(0))};
  std::size_t t = 0;
  for (auto _ : state) benchmark::DoNotOptimize(run_trial(c, point, t++));
}
BENCHMARK(BM_Trial)->DenseRange(0, 3)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
