#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "oracle.hpp"
#include "snseg/metrics.hpp"

using namespace snseg;

namespace {

std::vector<int> random_cps(std::mt19937& gen, int n) {
  std::vector<int> cps;
  for (int t = 1; t < n; ++t)
    if (std::uniform_int_distribution<int>(0, 5)(gen) == 0) cps.push_back(t);
  return cps;
}

}  // namespace

TEST(Hausdorff, SpecExamples) {
  const auto same = hausdorff_distances({200, 400}, {200, 400}, 1000);
  EXPECT_EQ(same.d1, 0.0);
  EXPECT_EQ(same.d2, 0.0);
  EXPECT_EQ(same.dh, 0.0);

  const auto r = hausdorff_distances({200, 400}, {210, 390, 500}, 1000);
  EXPECT_EQ(r.d1, 100.0);
  EXPECT_EQ(r.d2, 10.0);
  EXPECT_EQ(r.dh, 100.0);

  const auto missed = hausdorff_distances({300}, {}, 1000);
  EXPECT_EQ(missed.d1, 0.0);
  EXPECT_EQ(missed.d2, 1000.0);
  EXPECT_EQ(missed.dh, 1000.0);

  const auto spurious = hausdorff_distances({}, {300}, 1000);
  EXPECT_EQ(spurious.d1, 1000.0);
  EXPECT_EQ(spurious.d2, 0.0);
}

TEST(Hausdorff, SwappingArgumentsSwapsTheOneSidedDistances) {
  std::mt19937 gen(1);
  for (int rep = 0; rep < 200; ++rep) {
    const auto a = random_cps(gen, 50);
    const auto b = random_cps(gen, 50);
    const auto ab = hausdorff_distances(a, b, 50);
    const auto ba = hausdorff_distances(b, a, 50);
    EXPECT_EQ(ab.d1, ba.d2);
    EXPECT_EQ(ab.d2, ba.d1);
    EXPECT_EQ(ab.dh, ba.dh);
    EXPECT_EQ(ab.dh == 0.0, a == b);
  }
}

TEST(Ari, SpecExamples) {
  EXPECT_DOUBLE_EQ(adjusted_rand_index({200, 400}, {200, 400}, 1000), 1.0);
  EXPECT_DOUBLE_EQ(adjusted_rand_index({}, {}, 100), 1.0);
  EXPECT_NEAR(adjusted_rand_index({300, 700}, {}, 1000), 0.0, 1e-15);
  EXPECT_NEAR(adjusted_rand_index({5}, {4}, 10), oracle::ari_by_pairs({5}, {4}, 10), 1e-12);
}

TEST(Ari, MatchesPairEnumeration) {
  std::mt19937 gen(2);
  for (int rep = 0; rep < 300; ++rep) {
    const int n = std::uniform_int_distribution<int>(2, 30)(gen);
    const auto a = random_cps(gen, n);
    const auto b = random_cps(gen, n);
    const double got = adjusted_rand_index(a, b, n);
    EXPECT_NEAR(got, oracle::ari_by_pairs(a, b, n), 1e-12) << "n=" << n;
    EXPECT_NEAR(got, adjusted_rand_index(b, a, n), 1e-12);
    EXPECT_GE(got, -1.0);
    EXPECT_LE(got, 1.0);
    EXPECT_DOUBLE_EQ(adjusted_rand_index(a, a, n), 1.0);
  }
}

TEST(Report, BucketsAndMeans) {
  std::vector<ReplicationRun> exact(10, ReplicationRun{{200, 400}, {200, 400}, 600, 0.5});
  const auto perfect = summarize_replications(exact);
  EXPECT_EQ(perfect.runs, 10);
  EXPECT_EQ(perfect.count(0), 10);
  EXPECT_DOUBLE_EQ(perfect.fraction(0), 1.0);
  EXPECT_DOUBLE_EQ(perfect.mean_ari, 1.0);
  EXPECT_EQ(perfect.mean_dh, 0.0);
  EXPECT_DOUBLE_EQ(perfect.total_seconds, 5.0);

  const auto mixed = summarize_replications({{{200, 400}, {200, 300, 400}, 600, 0.0},
                                             {{200, 400}, {200}, 600, 0.0},
                                             {{200, 400}, {}, 600, 0.0},
                                             {{}, {1, 2, 3, 4, 5}, 600, 0.0},
                                             {{100, 200, 300}, {}, 600, 0.0}});
  EXPECT_EQ(mixed.count(1), 1);
  EXPECT_EQ(mixed.count(-1), 1);
  EXPECT_EQ(mixed.count(-2), 1);
  EXPECT_EQ(mixed.count(5), 1);  // clamped into the >=3 bucket
  EXPECT_EQ(mixed.count(-3), 1);
  EXPECT_EQ(mixed.buckets[6], 1);
  EXPECT_EQ(mixed.buckets[0], 1);
  EXPECT_THROW(summarize_replications({}), Error);

  const auto text = format_report(mixed, "demo");
  for (const char* label : ReplicationReport::kBucketLabels) EXPECT_NE(text.find(label), std::string::npos);
  EXPECT_NE(text.find("demo"), std::string::npos);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
}
