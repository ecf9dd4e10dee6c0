// Serial reference vs OpenMP kernels for the null simulation.

#include <benchmark/benchmark.h>

#include "sentinel/nullsim.hpp"

using namespace sentinel;

namespace {

const RiskLevels kLevels{0.9, 0.9};

const NullMoments& moments() {
  static const NullMoments mo = serial::estimate_null_moments(MeasureKind::CoVaR, kLevels, 250, 10000, 1);
  return mo;
}

void BM_MomentsSerial(benchmark::State& state) {
  for (auto _ : state)
    benchmark::DoNotOptimize(serial::estimate_null_moments(MeasureKind::CoVaR, kLevels, 250, 20000, 2));
}

void BM_MomentsOpenMP(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(estimate_null_moments(MeasureKind::CoVaR, kLevels, 250, 20000, 2));
}

void BM_SupsSerial(benchmark::State& state) {
  const auto& mo = moments();
  for (auto _ : state)
    benchmark::DoNotOptimize(serial::sup_detector_samples(MeasureKind::CoVaR, kLevels, 1000, 250, 0.5, mo, 200, 3));
}

void BM_SupsOpenMP(benchmark::State& state) {
  const auto& mo = moments();
  for (auto _ : state)
    benchmark::DoNotOptimize(sup_detector_samples(MeasureKind::CoVaR, kLevels, 1000, 250, 0.5, mo, 200, 3));
}

}  // namespace

BENCHMARK(BM_MomentsSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_MomentsOpenMP)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SupsSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SupsOpenMP)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
