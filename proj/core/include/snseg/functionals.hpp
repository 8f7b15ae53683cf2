#pragma once

#include <optional>
#include <vector>

#include "snseg/types.hpp"

namespace snseg {

/// Cumulative sums over the series, each column shifted by its first
/// observation so that level offsets do not swamp the differences.
/// Index t in 0..n; all range queries are 1-based and inclusive.
class PrefixCache {
 public:
  PrefixCache(const TimeSeriesMatrix& ts, bool cross_products);

  [[nodiscard]] int n() const noexcept { return n_; }
  [[nodiscard]] int p() const noexcept { return p_; }
  [[nodiscard]] double shift(int col) const noexcept { return shift_[static_cast<std::size_t>(col)]; }

  [[nodiscard]] double sum(int col, int a, int b) const noexcept { return range(sum_, col, a, b); }
  [[nodiscard]] double sum_sq(int col, int a, int b) const noexcept { return range(sq_, col, a, b); }
  /// Sum over t in [a, b-1] of y_t * y_{t+1}.
  [[nodiscard]] double lag_product(int col, int a, int b) const noexcept {
    return b > a ? range(lag_, col, a, b - 1) : 0.0;
  }
  /// Sum over t in [a, b] of y_{t,i} * y_{t,j}; i == j gives sum_sq.
  [[nodiscard]] double cross(int i, int j, int a, int b) const noexcept;
  [[nodiscard]] bool has_cross_products() const noexcept { return !cross_.empty(); }

 private:
  [[nodiscard]] double range(const std::vector<double>& v, int col, int a, int b) const noexcept {
    const std::size_t base = static_cast<std::size_t>(col) * static_cast<std::size_t>(n_ + 1);
    return v[base + static_cast<std::size_t>(b)] - v[base + static_cast<std::size_t>(a - 1)];
  }
  [[nodiscard]] std::size_t pair_index(int i, int j) const noexcept;

  int n_ = 0;
  int p_ = 0;
  std::vector<double> shift_;
  std::vector<double> sum_;
  std::vector<double> sq_;
  std::vector<double> lag_;
  std::vector<double> cross_;  // strictly lower pairs (i > j), packed
};

PrefixCache build_prefix_cache(const TimeSeriesMatrix& ts, const ParameterSpec& spec);

/// Subsample estimate theta_hat_{a,b} stacked over the spec's components.
/// With a cache the fast-path components use O(1) prefix differences;
/// without one every component is computed directly from the subsample.
/// Returns nullopt when an estimator degenerates (zero variance in a ratio).
/// Throws EstimatorError when b - a + 1 is below the spec's minimum support.
std::optional<std::vector<double>> estimate_subsample(const ParameterSpec& spec,
                                                      const TimeSeriesMatrix& ts, int a, int b,
                                                      const PrefixCache* cache = nullptr);

enum class EstimatorPath { Fast, Naive };

/// Stateful evaluator used by the sweeps. Besides single estimates it
/// produces whole runs theta_hat_{a,a..b} and theta_hat_{a..b,b}; quantile
/// runs are incremental (Fenwick tree over global ranks) on the fast path.
class Estimator {
 public:
  class Workspace {
   public:
    Workspace() = default;

   private:
    friend class Estimator;
    std::vector<int> tree;
    std::vector<double> scratch;
  };

  /// A borrowed cache must have been built from ts; otherwise the fast path
  /// builds its own.
  Estimator(const ParameterSpec& spec, const TimeSeriesMatrix& ts,
            EstimatorPath path = EstimatorPath::Fast, const PrefixCache* cache = nullptr);

  Estimator(const Estimator&) = delete;
  Estimator& operator=(const Estimator&) = delete;

  [[nodiscard]] Workspace workspace() const;
  [[nodiscard]] int dim() const noexcept { return spec_.dim(); }
  [[nodiscard]] const ParameterSpec& spec() const noexcept { return spec_; }
  [[nodiscard]] const TimeSeriesMatrix& series() const noexcept { return *ts_; }
  [[nodiscard]] EstimatorPath path() const noexcept { return path_; }

  /// Writes dim() values; false when too short or degenerate.
  bool estimate(int a, int b, double* out, Workspace& ws) const;

  /// Row r (0..b-a) of out receives theta_hat_{a, a+r}; valid[r] flags usable rows.
  void prefix_run(int a, int b, double* out, unsigned char* valid, Workspace& ws) const;
  /// Row r (0..b-a) of out receives theta_hat_{a+r, b}.
  void suffix_run(int a, int b, double* out, unsigned char* valid, Workspace& ws) const;

 private:
  bool component(std::size_t c, int a, int b, double* out, Workspace& ws) const;
  bool quantile_from_tree(double level, int count, double* out, const Workspace& ws) const;
  void tree_add(Workspace& ws, int rank, int delta) const;
  [[nodiscard]] int tree_kth(const Workspace& ws, int k) const;

  ParameterSpec spec_;
  const TimeSeriesMatrix* ts_;
  EstimatorPath path_;
  std::optional<PrefixCache> own_cache_;
  const PrefixCache* cache_ = nullptr;
  std::vector<int> rank_;        // global rank (1-based) of each observation, column 0
  std::vector<double> sorted_;   // column 0 sorted ascending
  int tree_log_ = 0;
};

/// Order-statistic quantile with linear interpolation at position 1 + (m-1) * level.
double interpolated_quantile(std::vector<double>& values, double level);

}  // namespace snseg
