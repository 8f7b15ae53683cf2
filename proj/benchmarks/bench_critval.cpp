#include <benchmark/benchmark.h>

#include "snseg/config.hpp"
#include "snseg/critval.hpp"

namespace {

using namespace snseg;

// One null replicate at the table length, every epsilon column at once.
void BM_NullReplicate(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const int n_sim = static_cast<int>(state.range(1));
  std::vector<int> hs;
  for (double e : epsilon_grid()) hs.push_back(grid_size_for(n_sim, e));
  std::uint64_t r = 0;
  for (auto _ : state) {
    auto row = null_replicate_maxima(TableKind::Sncp, d, n_sim, 1, r++, hs);
    benchmark::DoNotOptimize(row.data());
  }
}
BENCHMARK(BM_NullReplicate)->Args({1, 1000})->Args({2, 1000})->Args({5, 1000})->Args({1, 4000})
    ->Unit(benchmark::kMillisecond);

void BM_TableLookup(benchmark::State& state) {
  const auto& table = load_table(TableKind::Sncp, 1);
  double eps = 0.05;
  for (auto _ : state) {
    benchmark::DoNotOptimize(lookup_critical_value(table, eps, 0.9));
    eps = eps > 0.49 ? 0.05 : eps + 0.0037;
  }
}
BENCHMARK(BM_TableLookup);

}  // namespace

BENCHMARK_MAIN();
