#include <benchmark/benchmark.h>

#include "snseg/functionals.hpp"
#include "snseg/simgen.hpp"
#include "snseg/snhd.hpp"
#include "snseg/snstat.hpp"

namespace {

using namespace snseg;

TimeSeriesMatrix model_series(Model model, int n, std::uint64_t seed) {
  ModelSpec m = ModelSpec::named(model);
  for (int& b : m.cp_sets) b = static_cast<int>(static_cast<long long>(b) * n / m.n);
  m.n = n;
  return gen_model(m, seed).ts;
}

TimeSeriesMatrix v1_series(int n) { return model_series(Model::V1, n, 11); }

// Full-range sweep at eps = 0.05 with the prefix cache, the hot path of
// a single segmentation.
void BM_SweepCached(benchmark::State& state, const char* params) {
  const int n = static_cast<int>(state.range(0));
  const auto ts = v1_series(n);
  const auto spec = ParameterSpec::parse(params, 1);
  const int h = n / 20;
  const auto cache = build_prefix_cache(ts, spec);
  for (auto _ : state) {
    auto r = max_sweep(spec, ts, 1, n, h, &cache, {.keep_records = false, .threads = 1});
    benchmark::DoNotOptimize(r.max_stat.data());
  }
  state.SetComplexityN(n);
}
BENCHMARK_CAPTURE(BM_SweepCached, mean, "mean")->RangeMultiplier(2)->Range(256, 2048)->Complexity();
BENCHMARK_CAPTURE(BM_SweepCached, variance, "variance")->RangeMultiplier(2)->Range(256, 2048)->Complexity();
BENCHMARK_CAPTURE(BM_SweepCached, median, "q0.5")->Arg(1024);

void BM_SweepNaive(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto ts = v1_series(n);
  const auto spec = ParameterSpec::parse("variance", 1);
  const Estimator est(spec, ts, EstimatorPath::Naive);
  for (auto _ : state) {
    auto r = max_sweep(est, 1, n, n / 20, {.keep_records = false, .threads = 1});
    benchmark::DoNotOptimize(r.max_stat.data());
  }
}
BENCHMARK(BM_SweepNaive)->Arg(256)->Arg(512);

void BM_UStatSweep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto ts = model_series(Model::HD, n, 3);
  for (auto _ : state) {
    const UStatEngine engine(ts);
    auto r = engine.sweep(1, n, n / 20, {.keep_records = false, .threads = 1});
    benchmark::DoNotOptimize(r.max_stat.data());
  }
}
BENCHMARK(BM_UStatSweep)->Arg(300)->Arg(600)->Unit(benchmark::kMillisecond);

}  // namespace
