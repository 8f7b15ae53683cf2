#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace snseg {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid trimming, window size, confidence level or threshold.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Subsample too short for the requested estimator, or bad functional output.
class EstimatorError : public Error {
 public:
  using Error::Error;
};

/// Malformed input data, parameter lists or model specifications.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Missing, malformed or unsupported critical-value tables.
class TableError : public Error {
 public:
  using Error::Error;
};

/// n x p matrix of observations. Row t is the observation Y_{t+1}; storage is
/// column-major so that each component series is contiguous.
class TimeSeriesMatrix {
 public:
  TimeSeriesMatrix() = default;
  TimeSeriesMatrix(int n, int p, std::vector<double> column_major);

  static TimeSeriesMatrix univariate(std::vector<double> values);
  static TimeSeriesMatrix from_rows(const std::vector<std::vector<double>>& rows);

  [[nodiscard]] int n() const noexcept { return n_; }
  [[nodiscard]] int p() const noexcept { return p_; }

  /// Zero-based row and column.
  [[nodiscard]] double operator()(int row, int col) const noexcept {
    return values_[static_cast<std::size_t>(col) * static_cast<std::size_t>(n_) +
                   static_cast<std::size_t>(row)];
  }

  [[nodiscard]] std::span<const double> column(int col) const noexcept {
    return {values_.data() + static_cast<std::size_t>(col) * static_cast<std::size_t>(n_),
            static_cast<std::size_t>(n_)};
  }

  [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }

  /// Returns a copy with every entry mapped through alpha * y + beta.
  [[nodiscard]] TimeSeriesMatrix affine(double alpha, double beta) const;

  friend bool operator==(const TimeSeriesMatrix&, const TimeSeriesMatrix&) = default;

 private:
  int n_ = 0;
  int p_ = 0;
  std::vector<double> values_;
};

/// Read-only view of the rows a..b (1-based, inclusive) handed to user functionals.
class SubsampleView {
 public:
  SubsampleView(const TimeSeriesMatrix& ts, int a, int b) noexcept : ts_(&ts), a_(a), b_(b) {}

  [[nodiscard]] int rows() const noexcept { return b_ - a_ + 1; }
  [[nodiscard]] int cols() const noexcept { return ts_->p(); }
  /// Zero-based within the subsample.
  [[nodiscard]] double operator()(int row, int col) const noexcept {
    return (*ts_)(a_ - 1 + row, col);
  }
  [[nodiscard]] std::span<const double> column(int col) const noexcept {
    return ts_->column(col).subspan(static_cast<std::size_t>(a_ - 1),
                                    static_cast<std::size_t>(rows()));
  }

 private:
  const TimeSeriesMatrix* ts_;
  int a_;
  int b_;
};

using Functional = std::function<std::vector<double>(const SubsampleView&)>;

/// User-supplied parameter functional. It must return exactly output_dim
/// finite values for every subsample of at least min_support rows.
struct GenericFunctional {
  std::string name = "custom";
  int output_dim = 1;
  int min_support = 1;
  Functional fn;
};

enum class ParamKind {
  Mean,
  Variance,
  AcfLag1,
  BivariateCorrelation,
  Quantile,
  CovarianceMatrix,
  MultivariateMean,
  Generic,
};

struct Component {
  ParamKind kind = ParamKind::Mean;
  double level = 0.0;  // quantile level, Quantile only
  std::shared_ptr<const GenericFunctional> generic;

  static Component mean() { return of(ParamKind::Mean); }
  static Component variance() { return of(ParamKind::Variance); }
  static Component acf() { return of(ParamKind::AcfLag1); }
  static Component bivariate_correlation() { return of(ParamKind::BivariateCorrelation); }
  static Component quantile(double level) {
    Component c = of(ParamKind::Quantile);
    c.level = level;
    return c;
  }
  static Component covariance() { return of(ParamKind::CovarianceMatrix); }
  static Component multivariate_mean() { return of(ParamKind::MultivariateMean); }
  static Component custom(GenericFunctional f);

  /// Output length for a p-dimensional series.
  [[nodiscard]] int dim(int p) const;
  [[nodiscard]] int min_support() const;
  [[nodiscard]] bool fast_path() const;
  /// Name as accepted by ParameterSpec::parse ("mean", "q0.9", ...).
  [[nodiscard]] std::string label() const;

 private:
  static Component of(ParamKind k) {
    Component c;
    c.kind = k;
    return c;
  }
};

/// The functional under test, validated against the series dimension p.
class ParameterSpec {
 public:
  ParameterSpec(std::vector<Component> components, int p);

  /// Comma-separated list: mean, variance, acf, bivcor, covariance, mvmean, q<level>.
  static ParameterSpec parse(std::string_view list, int p);

  [[nodiscard]] const std::vector<Component>& components() const noexcept { return components_; }
  [[nodiscard]] int dim() const noexcept { return dim_; }
  [[nodiscard]] int p() const noexcept { return p_; }
  /// Offset of component i inside the stacked estimate vector.
  [[nodiscard]] int offset(std::size_t i) const noexcept { return offsets_[i]; }
  [[nodiscard]] int min_support() const noexcept { return min_support_; }
  [[nodiscard]] bool has_fast_path() const noexcept;
  [[nodiscard]] bool has_quantile() const noexcept;
  [[nodiscard]] std::string label() const;

 private:
  std::vector<Component> components_;
  std::vector<int> offsets_;
  int p_ = 1;
  int dim_ = 0;
  int min_support_ = 1;
};

enum class ConfigWarning {
  EpsilonBelowMinimum,
  EpsilonAboveMaximum,
  DimensionBelowRecommended,
};

std::string_view describe(ConfigWarning w);

struct SNConfig {
  double epsilon = 0.05;
  int grid_size = 0;
  double confidence = 0.9;
  double threshold = 0.0;
  std::vector<ConfigWarning> warnings;
};

/// The high-dimensional procedure is configured exactly like SNCP; only the
/// table behind the threshold differs.
using UStatConfig = SNConfig;

/// One evaluated local window: statistic plus (k, t1, t2), all 1-based.
struct SweepRecord {
  double stat = 0.0;
  int k = 0;
  int t1 = 0;
  int t2 = 0;
};

/// Per-k maxima over [s, e] and, optionally, every window statistic.
struct SweepResult {
  int s = 1;
  int e = 0;
  std::vector<double> max_stat;                 // index k - s
  std::vector<SweepRecord> records;             // grouped by k, ascending
  std::vector<std::size_t> record_offsets;      // size e - s + 2 when records kept

  [[nodiscard]] double stat_at(int k) const { return max_stat[static_cast<std::size_t>(k - s)]; }
  [[nodiscard]] std::span<const SweepRecord> records_for(int k) const;
  /// Smallest k attaining the maximum.
  [[nodiscard]] int argmax() const;
};

struct ComponentEstimates {
  std::string label;
  std::vector<std::vector<double>> per_segment;
};

enum class Method { Sncp, Snhd };

struct SegmentationResult {
  Method method = Method::Sncp;
  std::vector<int> est_cp;
  std::vector<double> cp_stat;  // statistic that triggered each change-point, same order as est_cp
  SweepResult sweep;            // top-level [1, n] sweep
  SNConfig config;
  std::optional<ParameterSpec> spec;
  std::vector<ComponentEstimates> estimates;
};

}  // namespace snseg
