#pragma once

#include <Eigen/Core>
#include <vector>

#include "snseg/snstat.hpp"
#include "snseg/types.hpp"

namespace snseg {

/// Two-sample U-statistic contrast between rows [t1, k] and [k+1, t2],
/// summed over distinct pairs on each side. Needs two rows per side.
double u_contrast(const TimeSeriesMatrix& ts, int t1, int k, int t2);

/// Sum of squared contrasts over the inner splits of [t1, k] and [k+1, t2],
/// divided by the full series length. Zero when neither side has an inner split.
double u_self_normalizer(const TimeSeriesMatrix& ts, int t1, int k, int t2);

/// Squared contrast over the self-normalizer; 0 when a side has fewer than
/// four rows or the normalizer vanishes.
double u_statistic(const TimeSeriesMatrix& ts, int t1, int k, int t2);

/// O(1) contrast queries from inner products of (first-row centred) prefix
/// sums. Memory grows as (n+1)^2 doubles.
class UStatEngine {
 public:
  explicit UStatEngine(const TimeSeriesMatrix& ts);

  [[nodiscard]] int n() const noexcept { return n_; }
  [[nodiscard]] double contrast(int t1, int k, int t2) const noexcept;
  /// Sum over t in [a+1, b-2] of contrast(a, t, b)^2.
  [[nodiscard]] double split_energy(int a, int b) const noexcept;
  [[nodiscard]] double statistic(int t1, int k, int t2) const noexcept;

  [[nodiscard]] SweepResult sweep(int s, int e, int h, const SweepOptions& opts = {}) const;

 private:
  int n_;
  Eigen::MatrixXd gram_;       // gram_(x, y) = C_x . C_y, C_t the prefix sum of rows 1..t
  std::vector<double> norms_;  // prefix sums of squared row norms
};

inline constexpr int kMinUStatSide = 4;

}  // namespace snseg
