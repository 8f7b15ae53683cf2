#pragma once

#include <array>
#include <string>
#include <vector>

namespace snseg {

struct HausdorffDistances {
  double d1 = 0.0;  // over-segmentation: worst estimate-to-truth distance
  double d2 = 0.0;  // under-segmentation: worst truth-to-estimate distance
  double dh = 0.0;
};

/// An empty estimate gives (0, n, n); an empty truth gives (n, 0, n).
HausdorffDistances hausdorff_distances(const std::vector<int>& truth, const std::vector<int>& estimate, int n);

/// Adjusted Rand index between the partitions of 1..n cut after each change-point.
double adjusted_rand_index(const std::vector<int>& truth, const std::vector<int>& estimate, int n);

struct ReplicationRun {
  std::vector<int> truth;
  std::vector<int> estimate;
  int n = 0;
  double seconds = 0.0;
};

struct ReplicationReport {
  static constexpr std::array<const char*, 7> kBucketLabels = {"<=-3", "-2", "-1", "0", "1", "2", ">=3"};

  std::array<int, 7> buckets{};  // counts of m_hat - m_0 per kBucketLabels
  int runs = 0;
  double mean_ari = 0.0;
  double mean_d1 = 0.0;
  double mean_d2 = 0.0;
  double mean_dh = 0.0;
  double total_seconds = 0.0;

  [[nodiscard]] int count(int difference) const;
  [[nodiscard]] double fraction(int difference) const;
};

ReplicationReport summarize_replications(const std::vector<ReplicationRun>& runs);

/// Plain-text table with one header line and one data line.
std::string format_report(const ReplicationReport& report, const std::string& label);

}  // namespace snseg
