#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "oracle.hpp"
#include "snseg/functionals.hpp"

using namespace snseg;

namespace {

std::vector<double> est(const char* params, const TimeSeriesMatrix& ts, int a, int b,
                        const PrefixCache* cache = nullptr) {
  const auto spec = ParameterSpec::parse(params, ts.p());
  const auto v = estimate_subsample(spec, ts, a, b, cache);
  EXPECT_TRUE(v.has_value());
  return v.value_or(std::vector<double>{});
}

void expect_close_rel(const std::vector<double>& a, const std::vector<double>& b, double tol) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double scale = std::max({std::abs(a[i]), std::abs(b[i]), 1e-12});
    EXPECT_LE(std::abs(a[i] - b[i]) / scale, tol) << "entry " << i << ": " << a[i] << " vs " << b[i];
  }
}

}  // namespace

TEST(Functionals, SpecExamples) {
  const auto steps = TimeSeriesMatrix::univariate({0, 0, 1, 1});
  EXPECT_EQ(est("mean", steps, 1, 2)[0], 0.0);
  EXPECT_EQ(est("mean", steps, 3, 4)[0], 1.0);
  EXPECT_DOUBLE_EQ(est("variance", TimeSeriesMatrix::univariate({1, 2, 3, 4}), 1, 4)[0], 1.25);
  EXPECT_EQ(est("q0.5", TimeSeriesMatrix::univariate({1, 2, 3}), 1, 3)[0], 2.0);

  const auto flat = fixtures::constant(4, 1, 2.5);
  EXPECT_FALSE(estimate_subsample(ParameterSpec::parse("acf", 1), flat, 1, 4).has_value());
  const PrefixCache cache(flat, false);
  EXPECT_FALSE(estimate_subsample(ParameterSpec::parse("acf", 1), flat, 1, 4, &cache).has_value());

  const auto small = TimeSeriesMatrix::univariate({1, 2, 3});
  const PrefixCache c3(small, false);
  EXPECT_EQ(est("mean", small, 1, 3, &c3)[0], 2.0);
}

TEST(Functionals, ShortSubsampleIsAnEstimatorError) {
  const auto ts = fixtures::noise(10, 1, 3);
  EXPECT_THROW(estimate_subsample(ParameterSpec::parse("variance", 1), ts, 4, 4), EstimatorError);
  EXPECT_THROW(estimate_subsample(ParameterSpec::parse("acf", 1), ts, 4, 4), EstimatorError);
  EXPECT_NO_THROW(estimate_subsample(ParameterSpec::parse("mean,q0.3", 1), ts, 4, 4));
  const auto ts2 = fixtures::noise(10, 2, 3);
  EXPECT_THROW(estimate_subsample(ParameterSpec::parse("bivcor", 2), ts2, 1, 1), EstimatorError);
  EXPECT_THROW(estimate_subsample(ParameterSpec::parse("covariance", 2), ts2, 1, 1), EstimatorError);
}

TEST(Functionals, MatchesLiteralOracleForEveryBuiltIn) {
  const auto uni = fixtures::noise(80, 1, 11);
  const auto biv = fixtures::noise(80, 2, 12);
  const auto tri = fixtures::noise(80, 3, 13);
  const std::vector<std::pair<const char*, const TimeSeriesMatrix*>> cases = {
      {"mean,variance,acf,q0.1,q0.5,q0.9", &uni}, {"bivcor", &biv}, {"mvmean,covariance", &tri}};
  std::mt19937 gen(5);
  for (const auto& [params, ts] : cases) {
    const auto spec = ParameterSpec::parse(params, ts->p());
    for (int rep = 0; rep < 200; ++rep) {
      int a = std::uniform_int_distribution<int>(1, 79)(gen);
      int b = std::uniform_int_distribution<int>(a + 1, 80)(gen);
      const auto want = oracle::estimate(spec, *ts, a, b);
      ASSERT_TRUE(want.has_value());
      expect_close_rel(*estimate_subsample(spec, *ts, a, b), *want, 1e-12);
    }
  }
}

TEST(Functionals, VarianceCacheAgreesWithNaiveOnThousandWindows) {
  const auto ts = fixtures::noise(300, 1, 21);
  const auto spec = ParameterSpec::parse("variance", 1);
  const auto cache = build_prefix_cache(ts, spec);
  std::mt19937 gen(22);
  double worst = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    const int a = std::uniform_int_distribution<int>(1, 299)(gen);
    const int b = std::uniform_int_distribution<int>(a + 1, 300)(gen);
    const double fast = (*estimate_subsample(spec, ts, a, b, &cache))[0];
    const double naive = (*estimate_subsample(spec, ts, a, b))[0];
    worst = std::max(worst, fixtures::rel_diff(fast, naive));
  }
  EXPECT_LE(worst, 1e-10);
}

TEST(Functionals, CovarianceCacheAgreesWithNaive) {
  const auto ts = fixtures::noise(60, 3, 31, 2.0);
  const auto spec = ParameterSpec::parse("covariance", 3);
  const auto cache = build_prefix_cache(ts, spec);
  expect_close_rel(*estimate_subsample(spec, ts, 5, 40, &cache), *estimate_subsample(spec, ts, 5, 40), 1e-10);
}

TEST(Functionals, FastAndNaivePathsAgreeOnRandomWindows) {
  std::mt19937 gen(41);
  const std::vector<std::pair<const char*, int>> cases = {
      {"mean", 1}, {"variance", 1}, {"acf", 1}, {"mean,variance,acf", 1},
      {"bivcor", 2}, {"mvmean", 4}, {"covariance", 3}, {"mvmean,covariance", 2}};
  for (const auto& [params, p] : cases) {
    const int n = std::uniform_int_distribution<int>(50, 500)(gen);
    // An offset far from zero makes cancellation in the prefix sums visible.
    const auto ts = fixtures::noise(n, p, static_cast<unsigned>(gen()), 1.5).affine(1.0, 40.0);
    const auto spec = ParameterSpec::parse(params, p);
    const auto cache = build_prefix_cache(ts, spec);
    double worst = 0.0;
    for (int rep = 0; rep < 10000; ++rep) {
      const int a = std::uniform_int_distribution<int>(1, n - 1)(gen);
      const int b = std::uniform_int_distribution<int>(a + 1, n)(gen);
      const auto fast = *estimate_subsample(spec, ts, a, b, &cache);
      const auto naive = *estimate_subsample(spec, ts, a, b);
      for (std::size_t i = 0; i < fast.size(); ++i) {
        // Relative to the larger of the value and the estimator's natural scale,
        // so that near-zero correlations do not blow up the ratio.
        const double scale = std::max({std::abs(naive[i]), std::abs(fast[i]), 1e-3});
        worst = std::max(worst, std::abs(fast[i] - naive[i]) / scale);
      }
    }
    EXPECT_LE(worst, 1e-10) << params;
  }
}

TEST(Functionals, EstimatorRunsMatchSingleEstimates) {
  const auto ts = fixtures::noise(60, 1, 51);
  for (const char* params : {"mean,variance", "acf", "q0.25,q0.9"}) {
    const auto spec = ParameterSpec::parse(params, 1);
    for (auto path : {EstimatorPath::Fast, EstimatorPath::Naive}) {
      const Estimator est(spec, ts, path);
      auto ws = est.workspace();
      const int a = 7, b = 49, d = spec.dim();
      std::vector<double> pre(static_cast<std::size_t>((b - a + 1) * d)), suf(pre.size());
      std::vector<unsigned char> pv(static_cast<std::size_t>(b - a + 1)), sv(pv.size());
      est.prefix_run(a, b, pre.data(), pv.data(), ws);
      est.suffix_run(a, b, suf.data(), sv.data(), ws);
      for (int r = 0; r <= b - a; ++r) {
        const auto left = oracle::estimate(spec, ts, a, a + r);
        ASSERT_EQ(static_cast<bool>(pv[static_cast<std::size_t>(r)]), left.has_value() && r + 1 >= spec.min_support());
        if (pv[static_cast<std::size_t>(r)])
          expect_close_rel({pre.begin() + r * d, pre.begin() + (r + 1) * d}, *left, 1e-10);
        const auto right = oracle::estimate(spec, ts, a + r, b);
        if (sv[static_cast<std::size_t>(r)])
          expect_close_rel({suf.begin() + r * d, suf.begin() + (r + 1) * d}, *right, 1e-10);
      }
    }
  }
}

TEST(Functionals, AffineEquivariance) {
  const auto ts = fixtures::noise(100, 1, 61);
  const std::vector<std::pair<double, double>> maps = {{2.5, -3.0}, {-0.4, 7.0}, {1e3, 1e-2}};
  for (const auto& [alpha, beta] : maps) {
    const auto moved = ts.affine(alpha, beta);
    for (auto [a, b] : {std::pair{1, 100}, std::pair{13, 57}}) {
      EXPECT_NEAR(est("mean", moved, a, b)[0], alpha * est("mean", ts, a, b)[0] + beta, 1e-10 * std::abs(alpha) + 1e-12);
      EXPECT_NEAR(est("variance", moved, a, b)[0] / (alpha * alpha), est("variance", ts, a, b)[0], 1e-10);
      EXPECT_NEAR(est("acf", moved, a, b)[0], est("acf", ts, a, b)[0], 1e-10);
    }
  }
  const auto biv = fixtures::noise(100, 2, 62);
  EXPECT_NEAR(est("bivcor", biv.affine(-3.0, 5.0), 10, 90)[0], est("bivcor", biv, 10, 90)[0], 1e-12);
}

TEST(Functionals, QuantileMonotoneAndEquivariant) {
  const auto ts = fixtures::noise(73, 1, 71);
  double prev = -INFINITY;
  for (double tau = 0.05; tau < 1.0; tau += 0.05) {
    const auto spec = ParameterSpec({Component::quantile(tau)}, 1);
    const double q = (*estimate_subsample(spec, ts, 3, 70))[0];
    EXPECT_GE(q, prev);
    prev = q;
    const double moved = (*estimate_subsample(spec, ts.affine(3.0, -1.0), 3, 70))[0];
    EXPECT_NEAR(moved, 3.0 * q - 1.0, 1e-12);
  }
}

TEST(Functionals, GenericFunctionalAndValidation) {
  const auto ts = fixtures::noise(30, 1, 81);
  GenericFunctional var;
  var.name = "var";
  var.min_support = 2;
  var.fn = [](const SubsampleView& v) {
    double s = 0, ss = 0;
    for (double x : v.column(0)) s += x;
    const double mu = s / v.rows();
    for (double x : v.column(0)) ss += (x - mu) * (x - mu);
    return std::vector<double>{ss / v.rows()};
  };
  const ParameterSpec custom({Component::custom(var)}, 1);
  EXPECT_NEAR((*estimate_subsample(custom, ts, 4, 25))[0], est("variance", ts, 4, 25)[0], 1e-12);

  GenericFunctional bad = var;
  bad.fn = [](const SubsampleView&) { return std::vector<double>{NAN}; };
  EXPECT_THROW(estimate_subsample(ParameterSpec({Component::custom(bad)}, 1), ts, 1, 10), EstimatorError);
  bad.fn = [](const SubsampleView&) { return std::vector<double>{1.0, 2.0}; };
  EXPECT_THROW(estimate_subsample(ParameterSpec({Component::custom(bad)}, 1), ts, 1, 10), EstimatorError);
}
