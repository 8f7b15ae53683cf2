#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "oracle.hpp"
#include "snseg/config.hpp"
#include "snseg/segmenter.hpp"
#include "snseg/simgen.hpp"
#include "snseg/snhd.hpp"

using namespace snseg;

namespace {

// Two-column integer fixture; the first six rows are the small example.
TimeSeriesMatrix pair_fixture() {
  return TimeSeriesMatrix::from_rows({{0, 0}, {1, 0}, {0, 1}, {1, 1}, {2, 2}, {3, 2}, {2, 3}, {3, 3}});
}

TimeSeriesMatrix first_rows(const TimeSeriesMatrix& ts, int rows) {
  std::vector<double> v;
  for (int j = 0; j < ts.p(); ++j)
    for (int t = 0; t < rows; ++t) v.push_back(ts(t, j));
  return {rows, ts.p(), v};
}

}  // namespace

TEST(UContrast, SpecExamples) {
  const auto six = first_rows(pair_fixture(), 6);
  const double want = oracle::u_contrast(six, 1, 4, 6);
  EXPECT_NE(want, 0.0);
  EXPECT_EQ(u_contrast(six, 1, 4, 6), want);
  EXPECT_EQ(UStatEngine(six).contrast(1, 4, 6), want);

  const auto flat = fixtures::constant(12, 3);
  EXPECT_EQ(u_contrast(flat, 1, 6, 12), 0.0);
  EXPECT_EQ(u_self_normalizer(flat, 1, 6, 12), 0.0);
  EXPECT_EQ(u_statistic(flat, 1, 6, 12), 0.0);
}

TEST(UContrast, ExpandedFormIsExactOnIntegerFixtures) {
  std::mt19937 gen(3);
  for (int rep = 0; rep < 100; ++rep) {
    const int p = std::uniform_int_distribution<int>(2, 6)(gen);
    const auto ts = fixtures::integers(20, p, static_cast<unsigned>(gen()));
    const UStatEngine engine(ts);
    const int t1 = std::uniform_int_distribution<int>(1, 5)(gen);
    const int k = t1 + std::uniform_int_distribution<int>(1, 7)(gen);
    const int t2 = k + std::uniform_int_distribution<int>(2, 8)(gen);
    const double want = oracle::u_contrast(ts, t1, k, t2);
    EXPECT_EQ(u_contrast(ts, t1, k, t2), want);
    EXPECT_EQ(engine.contrast(t1, k, t2), want);
  }
}

TEST(UContrast, MeanShiftIncreasesTheContrast) {
  const auto noise = fixtures::noise(40, 20, 5);
  const auto shifted = fixtures::with_shift(noise, 21, 1.0);
  const double before = u_contrast(noise, 1, 20, 40);
  const double after = u_contrast(shifted, 1, 20, 40);
  EXPECT_GT(after, 0.0);
  EXPECT_GT(after, before);
}

TEST(USelfNormalizer, MatchesSummandOracle) {
  const auto ts = pair_fixture();
  const double want = oracle::u_normalizer(ts, 1, 4, 8);
  EXPECT_GT(want, 0.0);
  EXPECT_LE(fixtures::rel_diff(u_self_normalizer(ts, 1, 4, 8), want), 1e-12);

  std::mt19937 gen(7);
  const auto noise = fixtures::noise(30, 4, 8);
  const UStatEngine engine(noise);
  for (int rep = 0; rep < 40; ++rep) {
    const int t1 = std::uniform_int_distribution<int>(1, 8)(gen);
    const int k = std::uniform_int_distribution<int>(t1 + 3, 18)(gen);
    const int t2 = std::uniform_int_distribution<int>(k + 4, 30)(gen);
    const double v = oracle::u_normalizer(noise, t1, k, t2);
    EXPECT_LE(fixtures::rel_diff(u_self_normalizer(noise, t1, k, t2), v), 1e-10);
    const double engine_v = (engine.split_energy(t1, k) + engine.split_energy(k + 1, t2)) / noise.n();
    EXPECT_LE(fixtures::rel_diff(engine_v, v), 1e-9);
  }
}

TEST(USelfNormalizer, ScalesWithTheFourthPower) {
  const auto ts = fixtures::noise(30, 5, 9);
  const double base = u_self_normalizer(ts, 2, 15, 29);
  for (double c : {2.0, -0.5, 10.0})
    EXPECT_LE(fixtures::rel_diff(u_self_normalizer(ts.affine(c, 0.0), 2, 15, 29), std::pow(c, 4) * base), 1e-12);
}

TEST(UStatistic, ScaleAndShiftInvariance) {
  std::mt19937 gen(11);
  const auto ts = fixtures::noise(50, 8, 12);
  std::vector<double> offset(8);
  for (double& o : offset) o = std::normal_distribution<double>(0.0, 5.0)(gen);
  std::vector<double> moved = ts.values();
  for (int j = 0; j < 8; ++j)
    for (int t = 0; t < 50; ++t) moved[static_cast<std::size_t>(j * 50 + t)] += offset[static_cast<std::size_t>(j)];
  const TimeSeriesMatrix shifted(50, 8, moved);
  for (auto [t1, k, t2] : {std::tuple{1, 20, 45}, std::tuple{5, 25, 50}, std::tuple{10, 30, 40}}) {
    const double base = u_statistic(ts, t1, k, t2);
    EXPECT_GE(base, 0.0);
    EXPECT_LE(fixtures::rel_diff(u_statistic(ts.affine(-3.0, 0.0), t1, k, t2), base), 1e-10);
    EXPECT_LE(fixtures::rel_diff(u_statistic(shifted, t1, k, t2), base), 1e-8);
  }
}

TEST(UStatistic, SidesShorterThanFourContributeNothing) {
  const auto ts = fixtures::noise(20, 3, 13);
  EXPECT_EQ(u_statistic(ts, 1, 3, 12), 0.0);
  EXPECT_EQ(u_statistic(ts, 1, 10, 13), 0.0);
  EXPECT_GT(u_statistic(ts, 1, 4, 8), 0.0);
  EXPECT_EQ(UStatEngine(ts).statistic(1, 3, 12), 0.0);
}

TEST(UStatSweep, MatchesDirectEvaluation) {
  const auto ts = fixtures::noise(48, 6, 14);
  const UStatEngine engine(ts);
  const int h = 4;
  const auto sweep = engine.sweep(1, 48, h, {.keep_records = true, .threads = 2});
  for (int k = 1; k <= 48; ++k) {
    double best = 0.0;
    for (const auto& w : nested_windows(k, h, 1, 48).pairs) best = std::max(best, u_statistic(ts, w.t1, k, w.t2));
    EXPECT_LE(std::abs(sweep.stat_at(k) - best), 1e-9 * std::max(1.0, best)) << k;
    EXPECT_EQ(sweep.records_for(k).size(), static_cast<std::size_t>(window_count(k, h, 1, 48)));
  }
}

TEST(Snhd, ConstantMatrixHasNoChangePoints) {
  const auto ts = fixtures::constant(120, 12);
  const auto cfg = resolve_ustat_config(120, 12, 0.1, std::nullopt, 0.9);
  EXPECT_TRUE(snhd_segment(ts, cfg).est_cp.empty());
}

TEST(Snhd, RejectsUnivariateInput) {
  const auto cfg = resolve_ustat_config(100, 2, 0.1, std::nullopt, 0.9);
  EXPECT_THROW(snhd_segment(fixtures::noise(100, 1, 1), cfg), ParameterError);
}

TEST(Snhd, HighDimensionalModelFindsFiveChangePoints) {
  const std::vector<int> truth{100, 200, 300, 400, 500};
  int good = 0;
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const auto sim = gen_model(ModelSpec::named(Model::HD), seed);
    const auto cfg = resolve_ustat_config(600, 100, 0.05, std::nullopt, 0.9);
    const auto r = snhd_segment(sim.ts, cfg, {.threads = 1, .keep_records = false, .estimates = true});
    for (std::size_t i = 1; i < r.est_cp.size(); ++i) EXPECT_GE(r.est_cp[i] - r.est_cp[i - 1], cfg.grid_size);
    for (double s : r.cp_stat) EXPECT_GT(s, cfg.threshold);
    ASSERT_EQ(r.estimates.size(), 1u);
    EXPECT_EQ(r.estimates[0].per_segment.size(), r.est_cp.size() + 1);
    if (r.est_cp.size() != truth.size()) continue;
    bool close = true;
    for (std::size_t i = 0; i < truth.size(); ++i) close = close && std::abs(r.est_cp[i] - truth[i]) <= 20;
    good += close;
  }
  EXPECT_GE(good, 3);
}

TEST(Snhd, SizeIsNearNominalOnNullData) {
  const int reps = 100;
  int empty = 0;
  const auto cfg = resolve_ustat_config(300, 50, 0.05, std::nullopt, 0.9);
  for (int r = 0; r < reps; ++r) {
    Rng rng(4242, static_cast<std::uint64_t>(r));
    std::vector<double> v(300 * 50);
    for (double& x : v) x = rng.normal();
    empty += snhd_segment(TimeSeriesMatrix(300, 50, v), cfg, {.threads = 1, .keep_records = false}).est_cp.empty();
  }
  // Nominal 90%; the band allows for 100 binomial draws and table error.
  EXPECT_GE(empty, 80);
  EXPECT_LE(empty, 97);
}
