#include <gtest/gtest.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "snseg/config.hpp"
#include "snseg/critval.hpp"
#include "snseg/snhd.hpp"
#include "snseg/snstat.hpp"

using namespace snseg;

namespace {

CriticalValueTable two_row_table() {
  CriticalValueTable t;
  t.epsilons = {0.09, 0.10};
  t.levels = confidence_levels();
  t.values = {120, 130, 150, 160, 190, 110, 118, 140, 150, 180};
  return t;
}

double brute_force_max(TableKind kind, const TimeSeriesMatrix& ts, int h) {
  double best = 0.0;
  if (kind == TableKind::Snhd) {
    for (int k = 1; k <= ts.n(); ++k)
      for (const auto& w : nested_windows(k, h, 1, ts.n()).pairs) best = std::max(best, u_statistic(ts, w.t1, k, w.t2));
    return best;
  }
  const auto spec = ParameterSpec::parse("mean", ts.p());
  const auto sweep = max_sweep(spec, ts, 1, ts.n(), h, nullptr, {.keep_records = false, .threads = 1});
  return *std::max_element(sweep.max_stat.begin(), sweep.max_stat.end());
}

}  // namespace

TEST(Lookup, GridHitsAndInterpolation) {
  const auto t = two_row_table();
  EXPECT_EQ(lookup_critical_value(t, 0.09, 0.9), 120.0);
  EXPECT_EQ(lookup_critical_value(t, 0.10, 0.999), 180.0);
  EXPECT_NEAR(lookup_critical_value(t, 0.0925, 0.9), 117.5, 1e-9);
  EXPECT_NEAR(lookup_critical_value(t, 102.0 / 1024.0, 0.95), 130 + (102.0 / 1024.0 - 0.09) / 0.01 * (118 - 130), 1e-9);
  EXPECT_THROW(lookup_critical_value(t, 0.09, 0.8), TableError);
  EXPECT_THROW(lookup_critical_value(t, 0.2, 0.9), TableError);
}

TEST(Lookup, ShippedValuesNearReference) {
  const auto& d1 = load_table(TableKind::Sncp, 1);
  EXPECT_NEAR(lookup_critical_value(d1, 0.05, 0.9), 141.8941, 0.03 * 141.8941);
  EXPECT_NEAR(lookup_critical_value(d1, 0.10, 0.9), 110.9993, 0.03 * 110.9993);
  EXPECT_NEAR(lookup_critical_value(d1, 102.0 / 1024.0, 0.9), 111.1472, 0.03 * 111.1472);
  EXPECT_NEAR(lookup_critical_value(load_table(TableKind::Sncp, 2), 0.10, 0.9), 167.4226, 0.03 * 167.4226);
  EXPECT_NEAR(lookup_critical_value(load_table(TableKind::Sncp, 5), 0.05, 0.9), 415.8649, 0.03 * 415.8649);
}

TEST(ShippedTables, CoverTheGridAndIncreaseInQ) {
  for (int d = 1; d <= 10; ++d) {
    const auto& t = load_table(TableKind::Sncp, d);
    EXPECT_EQ(t.d, d);
    EXPECT_EQ(t.epsilons, epsilon_grid());
    EXPECT_EQ(t.levels, confidence_levels());
    for (std::size_t e = 0; e < t.epsilons.size(); ++e)
      for (std::size_t q = 1; q < t.levels.size(); ++q) EXPECT_LT(t.at(e, q - 1), t.at(e, q)) << "d=" << d;
  }
  const auto& hd = load_table(TableKind::Snhd, 50);
  EXPECT_EQ(hd.kind, TableKind::Snhd);
  for (std::size_t e = 0; e < hd.epsilons.size(); ++e)
    for (std::size_t q = 1; q < hd.levels.size(); ++q) EXPECT_LT(hd.at(e, q - 1), hd.at(e, q));
}

TEST(ShippedTables, IncreaseWithDimension) {
  for (int d = 2; d <= 5; ++d) {
    const auto& lo = load_table(TableKind::Sncp, d - 1);
    const auto& hi = load_table(TableKind::Sncp, d);
    for (std::size_t i = 0; i < lo.values.size(); ++i) EXPECT_LT(lo.values[i], hi.values[i]) << "d=" << d << " entry " << i;
  }
}

TEST(ShippedTables, DimensionAboveTenIsAnError) {
  try {
    (void)load_table(TableKind::Sncp, 11);
    FAIL() << "expected a TableError";
  } catch (const TableError& e) {
    EXPECT_NE(std::string(e.what()).find("critval"), std::string::npos);
  }
  EXPECT_THROW(resolve_config(500, 0.1, std::nullopt, 0.9, 11), TableError);
}

TEST(NullKernel, MatchesTheGeneralSweep) {
  const std::vector<int> hs{3, 6, 10};
  for (int d : {1, 2, 3, 5, 12}) {
    for (std::uint64_t r = 0; r < 3; ++r) {
      const auto ts = null_replicate_data(TableKind::Sncp, d, 60, 99, r);
      ASSERT_EQ(ts.n(), 60);
      ASSERT_EQ(ts.p(), d);
      const auto got = null_replicate_maxima(TableKind::Sncp, d, 60, 99, r, hs);
      ASSERT_EQ(got.size(), hs.size());
      for (std::size_t i = 0; i < hs.size(); ++i) {
        const double want = brute_force_max(TableKind::Sncp, ts, hs[i]);
        EXPECT_LE(std::abs(got[i] - want), 1e-8 * std::max(1.0, want)) << "d=" << d << " h=" << hs[i];
      }
    }
  }
  const std::vector<int> uhs{4, 8};
  for (std::uint64_t r = 0; r < 3; ++r) {
    const auto ts = null_replicate_data(TableKind::Snhd, 7, 40, 5, r);
    const auto got = null_replicate_maxima(TableKind::Snhd, 7, 40, 5, r, uhs);
    for (std::size_t i = 0; i < uhs.size(); ++i) {
      const double want = brute_force_max(TableKind::Snhd, ts, uhs[i]);
      EXPECT_LE(std::abs(got[i] - want), 1e-8 * std::max(1.0, want));
    }
  }
}

TEST(Simulation, ReproducibleAndIndependentOfThreads) {
  NullSimulationOptions opts;
  opts.n_sim = 100;
  opts.reps = 300;
  opts.seed = 17;
  opts.epsilons = {0.1, 0.2, 0.5};
  opts.threads = 1;
  const auto a = simulate_null_table(TableKind::Sncp, 2, opts);
  opts.threads = 4;
  const auto b = simulate_null_table(TableKind::Sncp, 2, opts);
  EXPECT_EQ(format_table(a), format_table(b));
  EXPECT_EQ(a.epsilons, (std::vector<double>{0.1, 0.2, 0.5}));
  for (std::size_t e = 0; e < a.epsilons.size(); ++e)
    for (std::size_t q = 1; q < a.levels.size(); ++q) EXPECT_LE(a.at(e, q - 1), a.at(e, q));

  opts.seed = 18;
  EXPECT_NE(format_table(simulate_null_table(TableKind::Sncp, 2, opts)), format_table(a));
}

TEST(Simulation, ProgressAndValidation) {
  NullSimulationOptions opts;
  opts.n_sim = 60;
  opts.reps = 20;
  opts.epsilons = {0.1};
  int last = 0;
  opts.progress = [&](int done, int total) {
    EXPECT_EQ(total, 20);
    EXPECT_EQ(done, last + 1);
    last = done;
  };
  (void)simulate_null_table(TableKind::Snhd, 3, opts);
  EXPECT_EQ(last, 20);

  opts.progress = nullptr;
  opts.epsilons = {0.11111};
  EXPECT_THROW(simulate_null_table(TableKind::Sncp, 1, opts), ConfigError);
  opts.epsilons = {0.05};
  EXPECT_THROW(simulate_null_table(TableKind::Snhd, 3, opts), ConfigError);  // h = 3 < 4
  EXPECT_THROW(simulate_null_table(TableKind::Snhd, 1, opts), ParameterError);
}

TEST(Simulation, DoublingReplicationsMovesTheNinetyPercentQuantileLittle) {
  NullSimulationOptions opts;
  opts.n_sim = 200;
  opts.epsilons = {0.1, 0.2};
  opts.threads = 0;
  opts.reps = 20000;
  const auto base = simulate_null_table(TableKind::Sncp, 1, opts);
  opts.reps = 40000;
  const auto doubled = simulate_null_table(TableKind::Sncp, 1, opts);
  for (std::size_t e = 0; e < base.epsilons.size(); ++e)
    EXPECT_LT(std::abs(doubled.at(e, 0) - base.at(e, 0)) / base.at(e, 0), 0.015);
}

TEST(Simulation, HighDimensionalTableBarelyDependsOnP) {
  // The limit does not involve p. At n_sim = 300 the p = 100 quantiles sit a
  // few percent from the p = 50 ones (about 7% at eps = 0.1, 3% at 0.2).
  NullSimulationOptions opts;
  opts.n_sim = 300;
  opts.reps = 1000;
  opts.epsilons = {0.1, 0.2};
  opts.threads = 0;
  const auto p50 = simulate_null_table(TableKind::Snhd, 50, opts);
  const auto p100 = simulate_null_table(TableKind::Snhd, 100, opts);
  for (std::size_t e = 0; e < p50.epsilons.size(); ++e)
    EXPECT_LT(std::abs(p100.at(e, 0) - p50.at(e, 0)) / p50.at(e, 0), 0.10) << p50.epsilons[e];
}

TEST(Persistence, RoundTripIsBitExact) {
  CriticalValueTable t;
  t.kind = TableKind::Snhd;
  t.d = 50;
  t.n_sim = 600;
  t.reps = 12345;
  t.seed = 0xfeedbeefULL;
  t.epsilons = {0.05, 0.06, 0.5};
  t.levels = confidence_levels();
  // Generated tables hold 10 significant digits; the file must reproduce those doubles exactly.
  for (std::size_t i = 0; i < 15; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", 1.0 + 0.123456789123 * static_cast<double>(i * i));
    t.values.push_back(std::strtod(buf, nullptr));
  }
  const auto text = format_table(t);
  const auto back = parse_table(text);
  EXPECT_EQ(back.kind, t.kind);
  EXPECT_EQ(back.d, t.d);
  EXPECT_EQ(back.n_sim, t.n_sim);
  EXPECT_EQ(back.reps, t.reps);
  EXPECT_EQ(back.seed, t.seed);
  EXPECT_EQ(back.epsilons, t.epsilons);
  EXPECT_EQ(back.values, t.values);
  EXPECT_EQ(format_table(back), text);

  const auto dir = std::filesystem::temp_directory_path() / "snseg_table_test";
  std::filesystem::create_directories(dir);
  write_table(t, dir / "t.tbl");
  EXPECT_EQ(format_table(read_table(dir / "t.tbl")), text);
  std::filesystem::remove_all(dir);
}

TEST(Persistence, ShippedFilesRoundTrip) {
  for (const auto& dir : table_search_path()) {
    const auto path = dir / table_file_name(TableKind::Sncp, 1);
    if (!std::filesystem::exists(path)) continue;
    std::ifstream in(path);
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    EXPECT_EQ(format_table(parse_table(text)), text);
    return;
  }
  FAIL() << "no shipped table found";
}

TEST(Persistence, RejectsMalformedTables) {
  EXPECT_THROW(parse_table(""), TableError);
  EXPECT_THROW(parse_table("TABLE kind=sncp d=1 n_sim=1 reps=2 seed=1\n"), TableError);
  EXPECT_THROW(parse_table("SNTABLE kind=other d=1 n_sim=1 reps=2 seed=1\n0.05 0.9 1\n"), TableError);
  EXPECT_THROW(parse_table("SNTABLE kind=sncp d=1 n_sim=1 reps=2 seed=1\n"), TableError);
  EXPECT_THROW(parse_table("SNTABLE kind=sncp d=1 n_sim=1 reps=2 seed=1\n0.05 0.9 abc\n"), TableError);
  EXPECT_THROW(parse_table("SNTABLE kind=sncp d=1 n_sim=1 reps=2 seed=1\n0.05 0.9 1\n"), TableError);
  EXPECT_THROW(read_table("/nonexistent/table.tbl"), TableError);
}

TEST(TableSearch, EnvironmentOverrideComesFirst) {
  const auto dir = std::filesystem::temp_directory_path() / "snseg_env_tables";
  ::setenv("SNSEG_TABLE_DIR", dir.c_str(), 1);
  const auto path = table_search_path();
  ::unsetenv("SNSEG_TABLE_DIR");
  ASSERT_FALSE(path.empty());
  EXPECT_EQ(path.front(), dir);
  EXPECT_EQ(table_file_name(TableKind::Sncp, 3), "sncp_d3.tbl");
  EXPECT_EQ(table_file_name(TableKind::Snhd, 50), "snhd.tbl");
}
