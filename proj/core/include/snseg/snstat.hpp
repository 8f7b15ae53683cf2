#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "snseg/functionals.hpp"
#include "snseg/types.hpp"

namespace snseg {

struct WindowPair {
  int t1 = 0;
  int t2 = 0;
  friend bool operator==(const WindowPair&, const WindowPair&) = default;
};

/// Local windows (t1, t2) around k whose sides are whole multiples of h and
/// which fit inside [s, e]. Ordered by t1 descending (j1 = 1, 2, ...) then t2
/// ascending.
struct WindowSet {
  int k = 0;
  std::vector<WindowPair> pairs;
};

WindowSet nested_windows(int k, int h, int s, int e);

/// floor((k - s + 1) / h) * floor((e - k) / h), without materializing the set.
long long window_count(int k, int h, int s, int e);

/// Scaled difference of the estimates on [t1, k] and [k+1, t2]. nullopt when
/// either estimate degenerates.
std::optional<std::vector<double>> contrast_D(const ParameterSpec& spec, const TimeSeriesMatrix& ts,
                                              int t1, int k, int t2,
                                              const PrefixCache* cache = nullptr);

/// Sum of the left and right self-normalizers on the window (t1, k, t2).
Eigen::MatrixXd self_normalizer_V(const ParameterSpec& spec, const TimeSeriesMatrix& ts, int t1,
                                  int k, int t2, const PrefixCache* cache = nullptr);

/// D' V^+ D, or 0 when the window is degenerate.
double test_statistic_T(const ParameterSpec& spec, const TimeSeriesMatrix& ts, int t1, int k,
                        int t2, const PrefixCache* cache = nullptr);

struct SweepOptions {
  bool keep_records = true;
  int threads = 0;  // 0 = hardware concurrency
};

/// Per-k maxima of the window statistic over [s, e] with window unit h.
SweepResult max_sweep(const Estimator& est, int s, int e, int h, const SweepOptions& opts = {});

SweepResult max_sweep(const ParameterSpec& spec, const TimeSeriesMatrix& ts, int s, int e, int h,
                      const PrefixCache* cache = nullptr, const SweepOptions& opts = {});

}  // namespace snseg
