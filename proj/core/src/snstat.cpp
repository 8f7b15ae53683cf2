#include "snseg/snstat.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "detail/interval.hpp"
#include "detail/parallel.hpp"
#include "detail/quadform.hpp"

namespace snseg {

namespace detail {

void accumulate_normalizer(int d, int m, const double* left, const unsigned char* left_ok,
                           const double* right, const unsigned char* right_ok, double* out) {
  const double inv_m2 = 1.0 / (static_cast<double>(m) * m);
  if (d == 1) {
    double acc = 0.0;
    for (int l = 1; l < m; ++l) {
      if (!left_ok[l - 1] || !right_ok[l - 1]) continue;
      const double w = static_cast<double>(l) * l * (m - l) * (m - l) * inv_m2;
      const double diff = left[l - 1] - right[l - 1];
      acc += w * diff * diff;
    }
    out[0] += acc;
    return;
  }
  std::vector<double> diff(static_cast<std::size_t>(d));
  for (int l = 1; l < m; ++l) {
    if (!left_ok[l - 1] || !right_ok[l - 1]) continue;
    const double w = static_cast<double>(l) * l * (m - l) * (m - l) * inv_m2;
    const double* x = left + static_cast<std::ptrdiff_t>(l - 1) * d;
    const double* y = right + static_cast<std::ptrdiff_t>(l - 1) * d;
    for (int i = 0; i < d; ++i) diff[static_cast<std::size_t>(i)] = x[i] - y[i];
    std::size_t o = 0;
    for (int i = 0; i < d; ++i) {
      const double wi = w * diff[static_cast<std::size_t>(i)];
      for (int j = 0; j <= i; ++j) out[o++] += wi * diff[static_cast<std::size_t>(j)];
    }
  }
}

IntervalStats interval_stats(const Estimator& est, int a, int b, Estimator::Workspace& ws) {
  const int d = est.dim();
  const int m = b - a + 1;
  IntervalStats st;
  std::vector<double> suffix(static_cast<std::size_t>(m) * static_cast<std::size_t>(d));
  std::vector<unsigned char> suffix_ok(static_cast<std::size_t>(m));
  est.suffix_run(a, b, suffix.data(), suffix_ok.data(), ws);
  st.valid = suffix_ok[0] != 0;
  st.theta.assign(suffix.begin(), suffix.begin() + d);
  st.sn.assign(packed_size(d), 0.0);
  if (m > 1) {
    std::vector<double> prefix(static_cast<std::size_t>(m - 1) * static_cast<std::size_t>(d));
    std::vector<unsigned char> prefix_ok(static_cast<std::size_t>(m - 1));
    est.prefix_run(a, b - 1, prefix.data(), prefix_ok.data(), ws);
    accumulate_normalizer(d, m, prefix.data(), prefix_ok.data(), suffix.data() + d,
                          suffix_ok.data() + 1, st.sn.data());
  }
  return st;
}

double window_statistic(int d, int m_left, const double* theta_left, const double* sn_left,
                        int m_right, const double* theta_right, const double* sn_right,
                        double* scratch) {
  double* diff = scratch;
  double* sum = scratch + d;
  double scale = 0.0;
  for (int i = 0; i < d; ++i) {
    diff[i] = theta_left[i] - theta_right[i];
    scale = std::max({scale, std::abs(theta_left[i]), std::abs(theta_right[i])});
  }
  const std::size_t np = packed_size(d);
  for (std::size_t i = 0; i < np; ++i) sum[i] = sn_left[i] + sn_right[i];
  const double floor = normalizer_floor(m_left, m_right, scale);
  const double q = pseudo_quadratic(d, diff, sum, floor, normalizer_rank_deficient(d, m_left, m_right));
  const double ml = m_left;
  const double mr = m_right;
  return ml * ml * mr * mr / (ml + mr) * q;
}

}  // namespace detail

namespace {

void check_window(const ParameterSpec& spec, const TimeSeriesMatrix& ts, int t1, int k, int t2) {
  if (t1 < 1 || t2 > ts.n() || !(t1 <= k && k < t2))
    throw EstimatorError("window (" + std::to_string(t1) + ", " + std::to_string(k) + ", " +
                         std::to_string(t2) + ") is not a valid split of 1.." + std::to_string(ts.n()));
  const int need = spec.min_support();
  if (k - t1 + 1 < need || t2 - k < need)
    throw EstimatorError("window sides are shorter than the minimum support " + std::to_string(need));
}

Estimator make_estimator(const ParameterSpec& spec, const TimeSeriesMatrix& ts, const PrefixCache* cache) {
  return Estimator(spec, ts, cache ? EstimatorPath::Fast : EstimatorPath::Naive, cache);
}

}  // namespace

WindowSet nested_windows(int k, int h, int s, int e) {
  WindowSet set{k, {}};
  if (h < 1 || k < s || k > e) return set;
  const int left = (k - s + 1) / h;
  const int right = (e - k) / h;
  set.pairs.reserve(static_cast<std::size_t>(left) * static_cast<std::size_t>(right));
  for (int j1 = 1; j1 <= left; ++j1)
    for (int j2 = 1; j2 <= right; ++j2) set.pairs.push_back({k - j1 * h + 1, k + j2 * h});
  return set;
}

long long window_count(int k, int h, int s, int e) {
  if (h < 1 || k < s || k > e) return 0;
  return static_cast<long long>((k - s + 1) / h) * ((e - k) / h);
}

std::optional<std::vector<double>> contrast_D(const ParameterSpec& spec, const TimeSeriesMatrix& ts,
                                              int t1, int k, int t2, const PrefixCache* cache) {
  check_window(spec, ts, t1, k, t2);
  const Estimator est = make_estimator(spec, ts, cache);
  auto ws = est.workspace();
  const int d = spec.dim();
  std::vector<double> left(static_cast<std::size_t>(d));
  std::vector<double> right(static_cast<std::size_t>(d));
  if (!est.estimate(t1, k, left.data(), ws) || !est.estimate(k + 1, t2, right.data(), ws))
    return std::nullopt;
  const double ml = k - t1 + 1;
  const double mr = t2 - k;
  const double n = t2 - t1 + 1;
  const double scale = ml * mr / std::pow(n, 1.5);
  for (int i = 0; i < d; ++i) left[static_cast<std::size_t>(i)] = scale * (left[static_cast<std::size_t>(i)] - right[static_cast<std::size_t>(i)]);
  return left;
}

Eigen::MatrixXd self_normalizer_V(const ParameterSpec& spec, const TimeSeriesMatrix& ts, int t1,
                                  int k, int t2, const PrefixCache* cache) {
  check_window(spec, ts, t1, k, t2);
  const Estimator est = make_estimator(spec, ts, cache);
  auto ws = est.workspace();
  const auto l = detail::interval_stats(est, t1, k, ws);
  const auto r = detail::interval_stats(est, k + 1, t2, ws);
  const int d = spec.dim();
  const double n = t2 - t1 + 1;
  Eigen::MatrixXd v(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j <= i; ++j) {
      const std::size_t o = detail::packed_index(i, j);
      v(i, j) = v(j, i) = (l.sn[o] + r.sn[o]) / (n * n);
    }
  return v;
}

double test_statistic_T(const ParameterSpec& spec, const TimeSeriesMatrix& ts, int t1, int k, int t2,
                        const PrefixCache* cache) {
  check_window(spec, ts, t1, k, t2);
  const Estimator est = make_estimator(spec, ts, cache);
  auto ws = est.workspace();
  const auto l = detail::interval_stats(est, t1, k, ws);
  const auto r = detail::interval_stats(est, k + 1, t2, ws);
  if (!l.valid || !r.valid) return 0.0;
  const int d = spec.dim();
  std::vector<double> scratch(static_cast<std::size_t>(d) + detail::packed_size(d));
  return detail::window_statistic(d, k - t1 + 1, l.theta.data(), l.sn.data(), t2 - k,
                                  r.theta.data(), r.sn.data(), scratch.data());
}

namespace {

// Summaries of every interval [b - j h + 1, b] inside [s, e]; right-hand
// window sides are left-hand sides of a later anchor, so one table serves both.
class IntervalTable {
 public:
  IntervalTable(const Estimator& est, int s, int e, int h, int threads)
      : d_(est.dim()), np_(detail::packed_size(est.dim())), s_(s), e_(e), h_(h) {
    const int len = e - s + 1;
    offsets_.assign(static_cast<std::size_t>(len + 1), 0);
    for (int b = s; b <= e; ++b)
      offsets_[static_cast<std::size_t>(b - s + 1)] = offsets_[static_cast<std::size_t>(b - s)] +
                                                      static_cast<std::size_t>((b - s + 1) / h);
    const std::size_t count = offsets_.back();
    theta_.assign(count * static_cast<std::size_t>(d_), 0.0);
    sn_.assign(count * np_, 0.0);
    valid_.assign(count, 0);

    struct Scratch {
      Estimator::Workspace ws;
      std::vector<double> suffix, prefix;
      std::vector<unsigned char> suffix_ok, prefix_ok;
    };
    const int workers = std::min(detail::resolve_threads(threads), std::max(len, 1));
    std::vector<Scratch> scratch(static_cast<std::size_t>(workers));
    for (auto& sc : scratch) sc.ws = est.workspace();

    // Long intervals are processed first so that chunks balance.
    detail::parallel_for(len, workers, [&](int idx, int worker) {
      const int b = e - idx;
      fill(est, b, scratch[static_cast<std::size_t>(worker)]);
    });
  }

  [[nodiscard]] std::size_t slot(int b, int j) const {
    return offsets_[static_cast<std::size_t>(b - s_)] + static_cast<std::size_t>(j - 1);
  }
  [[nodiscard]] const double* theta(std::size_t i) const { return theta_.data() + i * static_cast<std::size_t>(d_); }
  [[nodiscard]] const double* sn(std::size_t i) const { return sn_.data() + i * np_; }
  [[nodiscard]] bool valid(std::size_t i) const { return valid_[i] != 0; }

 private:
  // An interval is needed as a left side when b <= e - h and as a right side
  // when it starts at or after s + h.
  [[nodiscard]] bool needed(int a, int b) const { return b <= e_ - h_ || a >= s_ + h_; }

  template <class Scratch>
  void fill(const Estimator& est, int b, Scratch& sc) {
    const int jmax = (b - s_ + 1) / h_;
    int lowest = 0;
    for (int j = jmax; j >= 1; --j)
      if (needed(b - j * h_ + 1, b)) {
        lowest = b - j * h_ + 1;
        break;
      }
    if (lowest == 0) return;
    const int span = b - lowest + 1;
    sc.suffix.resize(static_cast<std::size_t>(span) * static_cast<std::size_t>(d_));
    sc.suffix_ok.resize(static_cast<std::size_t>(span));
    est.suffix_run(lowest, b, sc.suffix.data(), sc.suffix_ok.data(), sc.ws);
    for (int j = 1; j <= jmax; ++j) {
      const int a = b - j * h_ + 1;
      if (a < lowest || !needed(a, b)) continue;
      const int m = j * h_;
      const std::size_t at = slot(b, j);
      const std::size_t row = static_cast<std::size_t>(a - lowest);
      valid_[at] = sc.suffix_ok[row];
      std::copy_n(sc.suffix.data() + row * static_cast<std::size_t>(d_), d_,
                  theta_.data() + at * static_cast<std::size_t>(d_));
      if (!valid_[at] || m == 1) continue;
      sc.prefix.resize(static_cast<std::size_t>(m - 1) * static_cast<std::size_t>(d_));
      sc.prefix_ok.resize(static_cast<std::size_t>(m - 1));
      est.prefix_run(a, b - 1, sc.prefix.data(), sc.prefix_ok.data(), sc.ws);
      detail::accumulate_normalizer(d_, m, sc.prefix.data(), sc.prefix_ok.data(),
                                    sc.suffix.data() + (row + 1) * static_cast<std::size_t>(d_),
                                    sc.suffix_ok.data() + row + 1, sn_.data() + at * np_);
    }
  }

  int d_;
  std::size_t np_;
  int s_, e_, h_;
  std::vector<std::size_t> offsets_;
  std::vector<double> theta_;
  std::vector<double> sn_;
  std::vector<unsigned char> valid_;
};

}  // namespace

SweepResult max_sweep(const Estimator& est, int s, int e, int h, const SweepOptions& opts) {
  const int n = est.series().n();
  if (s < 1 || e > n || s >= e)
    throw ConfigError("sweep range [" + std::to_string(s) + ", " + std::to_string(e) + "] is invalid");
  if (h < 1) throw ConfigError("window size h must be at least 1");

  SweepResult out;
  out.s = s;
  out.e = e;
  const int len = e - s + 1;
  out.max_stat.assign(static_cast<std::size_t>(len), 0.0);
  std::vector<std::vector<SweepRecord>> per_k;
  if (opts.keep_records) per_k.resize(static_cast<std::size_t>(len));

  const int k_lo = s + h - 1;
  const int k_hi = e - h;
  if (k_lo <= k_hi) {
    const IntervalTable table(est, s, e, h, opts.threads);
    const int d = est.dim();
    const int workers = std::min(detail::resolve_threads(opts.threads), k_hi - k_lo + 1);
    std::vector<std::vector<double>> scratch(static_cast<std::size_t>(workers),
                                             std::vector<double>(static_cast<std::size_t>(d) + detail::packed_size(d)));
    detail::parallel_for(k_hi - k_lo + 1, workers, [&](int idx, int worker) {
      const int k = k_lo + idx;
      double* buf = scratch[static_cast<std::size_t>(worker)].data();
      const int j1max = (k - s + 1) / h;
      const int j2max = (e - k) / h;
      double best = 0.0;
      std::vector<SweepRecord>* rec = opts.keep_records ? &per_k[static_cast<std::size_t>(k - s)] : nullptr;
      if (rec) rec->reserve(static_cast<std::size_t>(j1max) * static_cast<std::size_t>(j2max));
      for (int j1 = 1; j1 <= j1max; ++j1) {
        const std::size_t li = table.slot(k, j1);
        for (int j2 = 1; j2 <= j2max; ++j2) {
          const int t2 = k + j2 * h;
          const std::size_t ri = table.slot(t2, j2);
          double stat = 0.0;
          if (table.valid(li) && table.valid(ri))
            stat = detail::window_statistic(d, j1 * h, table.theta(li), table.sn(li), j2 * h,
                                            table.theta(ri), table.sn(ri), buf);
          best = std::max(best, stat);
          if (rec) rec->push_back({stat, k, k - j1 * h + 1, t2});
        }
      }
      out.max_stat[static_cast<std::size_t>(k - s)] = best;
    }, 4);
  }

  if (opts.keep_records) {
    out.record_offsets.assign(static_cast<std::size_t>(len + 1), 0);
    std::size_t total = 0;
    for (int i = 0; i < len; ++i) {
      total += per_k[static_cast<std::size_t>(i)].size();
      out.record_offsets[static_cast<std::size_t>(i + 1)] = total;
    }
    out.records.reserve(total);
    for (auto& v : per_k) out.records.insert(out.records.end(), v.begin(), v.end());
  }
  return out;
}

SweepResult max_sweep(const ParameterSpec& spec, const TimeSeriesMatrix& ts, int s, int e, int h,
                      const PrefixCache* cache, const SweepOptions& opts) {
  const Estimator est(spec, ts, EstimatorPath::Fast, cache);
  return max_sweep(est, s, e, h, opts);
}

}  // namespace snseg
