#include "snseg/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace snseg {

namespace {

// Relative size below which a centred second moment is treated as exact zero.
// Prefix differences leave rounding residue of order 1e-16 * mean square.
constexpr double kCachedZeroMoment = 1e-12;
// Direct two-pass sums only carry residue of order (1e-16 * max|y|)^2.
constexpr double kNaiveZeroMoment = 1e-24;
// Centred moments of very short windows lose most of their digits to
// cancellation in prefix differences; below this length the direct loops are
// both exact enough and no slower.
constexpr int kDirectMomentWindow = 32;

double snap_moment(double v, double scale, double rel) {
  return v <= rel * scale ? 0.0 : v;
}

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

}  // namespace

PrefixCache::PrefixCache(const TimeSeriesMatrix& ts, bool cross_products)
    : n_(ts.n()), p_(ts.p()) {
  const std::size_t stride = idx(n_ + 1);
  shift_.resize(idx(p_));
  sum_.assign(stride * idx(p_), 0.0);
  sq_.assign(stride * idx(p_), 0.0);
  lag_.assign(stride * idx(p_), 0.0);
  for (int j = 0; j < p_; ++j) {
    const auto col = ts.column(j);
    const double shift = col[0];
    shift_[idx(j)] = shift;
    const std::size_t base = idx(j) * stride;
    for (int t = 1; t <= n_; ++t) {
      const double y = col[idx(t - 1)] - shift;
      sum_[base + idx(t)] = sum_[base + idx(t - 1)] + y;
      sq_[base + idx(t)] = sq_[base + idx(t - 1)] + y * y;
      const double next = t < n_ ? col[idx(t)] - shift : 0.0;
      lag_[base + idx(t)] = lag_[base + idx(t - 1)] + y * next;
    }
  }
  if (cross_products && p_ > 1) {
    const std::size_t pairs = idx(p_) * idx(p_ - 1) / 2;
    cross_.assign(pairs * stride, 0.0);
    for (int i = 1; i < p_; ++i) {
      for (int j = 0; j < i; ++j) {
        const std::size_t base = pair_index(i, j) * stride;
        const auto ci = ts.column(i);
        const auto cj = ts.column(j);
        for (int t = 1; t <= n_; ++t) {
          const double prod = (ci[idx(t - 1)] - shift_[idx(i)]) * (cj[idx(t - 1)] - shift_[idx(j)]);
          cross_[base + idx(t)] = cross_[base + idx(t - 1)] + prod;
        }
      }
    }
  }
}

std::size_t PrefixCache::pair_index(int i, int j) const noexcept {
  if (i < j) std::swap(i, j);
  return idx(i) * idx(i - 1) / 2 + idx(j);
}

double PrefixCache::cross(int i, int j, int a, int b) const noexcept {
  if (i == j) return sum_sq(i, a, b);
  const std::size_t base = pair_index(i, j) * idx(n_ + 1);
  return cross_[base + idx(b)] - cross_[base + idx(a - 1)];
}

namespace {

bool build_prefix_cache_needs_cross(const ParameterSpec& spec) {
  for (const Component& c : spec.components())
    if (c.kind == ParamKind::BivariateCorrelation || c.kind == ParamKind::CovarianceMatrix) return true;
  return false;
}

}  // namespace

PrefixCache build_prefix_cache(const TimeSeriesMatrix& ts, const ParameterSpec& spec) {
  return PrefixCache(ts, build_prefix_cache_needs_cross(spec) && ts.p() > 1);
}

double interpolated_quantile(std::vector<double>& values, double level) {
  const std::size_t m = values.size();
  const double pos = static_cast<double>(m - 1) * level;
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(lo);
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(lo), values.end());
  const double x_lo = values[lo];
  if (frac == 0.0 || lo + 1 >= m) return x_lo;
  const double x_hi = *std::min_element(values.begin() + static_cast<std::ptrdiff_t>(lo + 1), values.end());
  return x_lo + frac * (x_hi - x_lo);
}

namespace {

// ---- direct (slow path) estimators; a, b are 1-based inclusive ----

double naive_mean(std::span<const double> y, int a, int b) {
  double s = 0.0;
  for (int t = a; t <= b; ++t) s += y[idx(t - 1)];
  return s / (b - a + 1);
}

double naive_max_sq(std::span<const double> y, int a, int b) {
  double mx = 0.0;
  for (int t = a; t <= b; ++t) mx = std::max(mx, y[idx(t - 1)] * y[idx(t - 1)]);
  return mx;
}

double naive_variance(std::span<const double> y, int a, int b) {
  const double mu = naive_mean(y, a, b);
  double ss = 0.0;
  for (int t = a; t <= b; ++t) ss += (y[idx(t - 1)] - mu) * (y[idx(t - 1)] - mu);
  const int m = b - a + 1;
  return snap_moment(ss, m * naive_max_sq(y, a, b), kNaiveZeroMoment) / m;
}

bool naive_acf(std::span<const double> y, int a, int b, double& out) {
  const double mu = naive_mean(y, a, b);
  double num = 0.0;
  double den = 0.0;
  for (int t = a; t <= b; ++t) {
    const double d = y[idx(t - 1)] - mu;
    den += d * d;
    if (t < b) num += d * (y[idx(t)] - mu);
  }
  den = snap_moment(den, (b - a + 1) * naive_max_sq(y, a, b), kNaiveZeroMoment);
  if (den <= 0.0) return false;
  out = num / den;
  return true;
}

double naive_cov(std::span<const double> x, std::span<const double> y, int a, int b) {
  const double mx = naive_mean(x, a, b);
  const double my = naive_mean(y, a, b);
  double s = 0.0;
  for (int t = a; t <= b; ++t) s += (x[idx(t - 1)] - mx) * (y[idx(t - 1)] - my);
  return s / (b - a + 1);
}

// ---- prefix-sum (fast path) estimators ----

double cached_variance(const PrefixCache& c, int col, int a, int b) {
  const double m = b - a + 1;
  const double s = c.sum(col, a, b);
  const double q = c.sum_sq(col, a, b);
  const double ss = q - s * s / m;
  return snap_moment(ss, q, kCachedZeroMoment) / m;
}

double cached_cov(const PrefixCache& c, int i, int j, int a, int b) {
  if (i == j) return cached_variance(c, i, a, b);
  const double m = b - a + 1;
  return (c.cross(i, j, a, b) - c.sum(i, a, b) * c.sum(j, a, b) / m) / m;
}

}  // namespace

Estimator::Estimator(const ParameterSpec& spec, const TimeSeriesMatrix& ts, EstimatorPath path,
                     const PrefixCache* cache)
    : spec_(spec), ts_(&ts), path_(path) {
  if (spec.p() != ts.p())
    throw ParameterError("parameter spec was built for p = " + std::to_string(spec.p()) +
                         " but the series has p = " + std::to_string(ts.p()));
  if (path_ == EstimatorPath::Fast) {
    if (cache != nullptr && cache->n() == ts.n() && cache->p() == ts.p() &&
        (cache->has_cross_products() || !build_prefix_cache_needs_cross(spec))) {
      cache_ = cache;
    } else if (spec.has_fast_path()) {
      own_cache_ = build_prefix_cache(ts, spec);
      cache_ = &*own_cache_;
    }
    if (spec.has_quantile()) {
      const auto col = ts.column(0);
      const int n = ts.n();
      std::vector<int> order(idx(n));
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](int l, int r) { return col[idx(l)] < col[idx(r)]; });
      rank_.resize(idx(n));
      sorted_.resize(idx(n));
      for (int r = 0; r < n; ++r) {
        rank_[idx(order[idx(r)])] = r + 1;
        sorted_[idx(r)] = col[idx(order[idx(r)])];
      }
      tree_log_ = 1;
      while ((tree_log_ << 1) <= n) tree_log_ <<= 1;
    }
  }
}

Estimator::Workspace Estimator::workspace() const {
  Workspace ws;
  if (!rank_.empty()) ws.tree.assign(idx(ts_->n() + 1), 0);
  return ws;
}

void Estimator::tree_add(Workspace& ws, int rank, int delta) const {
  const int n = ts_->n();
  for (int i = rank; i <= n; i += i & -i) ws.tree[idx(i)] += delta;
}

int Estimator::tree_kth(const Workspace& ws, int k) const {
  const int n = ts_->n();
  int pos = 0;
  for (int step = tree_log_; step > 0; step >>= 1) {
    const int next = pos + step;
    if (next <= n && ws.tree[idx(next)] < k) {
      pos = next;
      k -= ws.tree[idx(next)];
    }
  }
  return pos + 1;
}

bool Estimator::quantile_from_tree(double level, int count, double* out, const Workspace& ws) const {
  const double pos = static_cast<double>(count - 1) * level;
  const int lo = static_cast<int>(std::floor(pos));
  const double frac = pos - lo;
  const double x_lo = sorted_[idx(tree_kth(ws, lo + 1) - 1)];
  if (frac == 0.0 || lo + 1 >= count) {
    *out = x_lo;
  } else {
    const double x_hi = sorted_[idx(tree_kth(ws, lo + 2) - 1)];
    *out = x_lo + frac * (x_hi - x_lo);
  }
  return true;
}

bool Estimator::component(std::size_t ci, int a, int b, double* out, Workspace& ws) const {
  const Component& c = spec_.components()[ci];
  const int m = b - a + 1;
  if (m < c.min_support()) return false;
  const TimeSeriesMatrix& ts = *ts_;
  const int p = ts.p();
  const PrefixCache* cache = cache_;
  const bool second_moment = c.kind != ParamKind::Mean && c.kind != ParamKind::MultivariateMean;
  const bool fast = cache != nullptr && c.fast_path() && (!second_moment || m > kDirectMomentWindow);

  switch (c.kind) {
    case ParamKind::Mean:
    case ParamKind::MultivariateMean: {
      for (int j = 0; j < p; ++j)
        out[j] = fast ? cache->sum(j, a, b) / m + cache->shift(j) : naive_mean(ts.column(j), a, b);
      return true;
    }
    case ParamKind::Variance:
      *out = fast ? cached_variance(*cache, 0, a, b) : naive_variance(ts.column(0), a, b);
      return true;
    case ParamKind::AcfLag1: {
      if (!fast) return naive_acf(ts.column(0), a, b, *out);
      const double s = cache->sum(0, a, b);
      const double q = cache->sum_sq(0, a, b);
      const double mu = s / m;
      const double den = snap_moment(q - m * mu * mu, q, kCachedZeroMoment);
      if (den <= 0.0) return false;
      const double s_head = cache->sum(0, a, b - 1);
      const double s_tail = cache->sum(0, a + 1, b);
      const double num = cache->lag_product(0, a, b) - mu * (s_head + s_tail) + (m - 1) * mu * mu;
      *out = num / den;
      return true;
    }
    case ParamKind::BivariateCorrelation: {
      double sxx, syy, sxy;
      if (fast) {
        const double qx = cache->sum_sq(0, a, b);
        const double qy = cache->sum_sq(1, a, b);
        const double sx = cache->sum(0, a, b);
        const double sy = cache->sum(1, a, b);
        sxx = snap_moment(qx - sx * sx / m, qx, kCachedZeroMoment);
        syy = snap_moment(qy - sy * sy / m, qy, kCachedZeroMoment);
        sxy = cache->cross(0, 1, a, b) - sx * sy / m;
      } else {
        sxx = naive_variance(ts.column(0), a, b) * m;
        syy = naive_variance(ts.column(1), a, b) * m;
        sxy = naive_cov(ts.column(0), ts.column(1), a, b) * m;
      }
      if (sxx <= 0.0 || syy <= 0.0) return false;
      *out = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
      return true;
    }
    case ParamKind::CovarianceMatrix: {
      int o = 0;
      for (int i = 0; i < p; ++i)
        for (int j = 0; j <= i; ++j) {
          if (fast) {
            out[o++] = cached_cov(*cache, i, j, a, b);
          } else {
            out[o++] = i == j ? naive_variance(ts.column(i), a, b)
                              : naive_cov(ts.column(i), ts.column(j), a, b);
          }
        }
      return true;
    }
    case ParamKind::Quantile: {
      const auto col = ts.column(0);
      ws.scratch.assign(col.begin() + a - 1, col.begin() + b);
      *out = interpolated_quantile(ws.scratch, c.level);
      return true;
    }
    case ParamKind::Generic: {
      const GenericFunctional& g = *c.generic;
      std::vector<double> v = g.fn(SubsampleView(ts, a, b));
      if (static_cast<int>(v.size()) != g.output_dim)
        throw EstimatorError("functional '" + g.name + "' returned " + std::to_string(v.size()) +
                             " values, expected " + std::to_string(g.output_dim));
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i])) throw EstimatorError("functional '" + g.name + "' returned a non-finite value");
        out[i] = v[i];
      }
      return true;
    }
  }
  return false;
}

bool Estimator::estimate(int a, int b, double* out, Workspace& ws) const {
  if (a < 1 || b > ts_->n() || b < a) return false;
  if (b - a + 1 < spec_.min_support()) return false;
  for (std::size_t c = 0; c < spec_.components().size(); ++c)
    if (!component(c, a, b, out + spec_.offset(c), ws)) return false;
  return true;
}

void Estimator::prefix_run(int a, int b, double* out, unsigned char* valid, Workspace& ws) const {
  const int d = dim();
  const bool use_tree = !rank_.empty();
  const auto& comps = spec_.components();
  for (int r = 0; a + r <= b; ++r) {
    const int end = a + r;
    if (use_tree) tree_add(ws, rank_[idx(end - 1)], 1);
    double* row = out + static_cast<std::ptrdiff_t>(r) * d;
    bool ok = r + 1 >= spec_.min_support();
    for (std::size_t c = 0; ok && c < comps.size(); ++c) {
      if (use_tree && comps[c].kind == ParamKind::Quantile)
        ok = quantile_from_tree(comps[c].level, r + 1, row + spec_.offset(c), ws);
      else
        ok = component(c, a, end, row + spec_.offset(c), ws);
    }
    valid[r] = ok ? 1 : 0;
  }
  if (use_tree)
    for (int t = a; t <= b; ++t) tree_add(ws, rank_[idx(t - 1)], -1);
}

void Estimator::suffix_run(int a, int b, double* out, unsigned char* valid, Workspace& ws) const {
  const int d = dim();
  const bool use_tree = !rank_.empty();
  const auto& comps = spec_.components();
  for (int start = b; start >= a; --start) {
    const int r = start - a;
    if (use_tree) tree_add(ws, rank_[idx(start - 1)], 1);
    double* row = out + static_cast<std::ptrdiff_t>(r) * d;
    const int count = b - start + 1;
    bool ok = count >= spec_.min_support();
    for (std::size_t c = 0; ok && c < comps.size(); ++c) {
      if (use_tree && comps[c].kind == ParamKind::Quantile)
        ok = quantile_from_tree(comps[c].level, count, row + spec_.offset(c), ws);
      else
        ok = component(c, start, b, row + spec_.offset(c), ws);
    }
    valid[r] = ok ? 1 : 0;
  }
  if (use_tree)
    for (int t = a; t <= b; ++t) tree_add(ws, rank_[idx(t - 1)], -1);
}

std::optional<std::vector<double>> estimate_subsample(const ParameterSpec& spec,
                                                      const TimeSeriesMatrix& ts, int a, int b,
                                                      const PrefixCache* cache) {
  if (a < 1 || b > ts.n() || a > b)
    throw EstimatorError("subsample [" + std::to_string(a) + ", " + std::to_string(b) +
                         "] is outside 1.." + std::to_string(ts.n()));
  if (b - a + 1 < spec.min_support())
    throw EstimatorError("subsample of length " + std::to_string(b - a + 1) +
                         " is shorter than the minimum support " + std::to_string(spec.min_support()));
  const Estimator est(spec, ts, cache ? EstimatorPath::Fast : EstimatorPath::Naive, cache);
  auto ws = est.workspace();
  std::vector<double> out(idx(spec.dim()));
  if (!est.estimate(a, b, out.data(), ws)) return std::nullopt;
  return out;
}

}  // namespace snseg
