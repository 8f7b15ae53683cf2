#include "snseg/critval.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

#include "detail/parallel.hpp"
#include "detail/quadform.hpp"
#include "snseg/config.hpp"
#include "snseg/simgen.hpp"
#include "snseg/snhd.hpp"
#include "snseg/types.hpp"

namespace snseg {

const std::vector<double>& epsilon_grid() {
  static const std::vector<double> grid = {0.05, 0.06, 0.07, 0.08, 0.09, 0.10, 0.11, 0.12, 0.13,
                                           0.14, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45, 0.50};
  return grid;
}

const std::vector<double>& confidence_levels() {
  static const std::vector<double> levels = {0.9, 0.95, 0.99, 0.995, 0.999};
  return levels;
}

namespace {

constexpr double kGridTolerance = 1e-9;

std::optional<std::size_t> index_in(const std::vector<double>& values, double x) {
  for (std::size_t i = 0; i < values.size(); ++i)
    if (std::abs(values[i] - x) <= kGridTolerance) return i;
  return std::nullopt;
}

// Type-7 empirical quantile of a sorted sample.
double sorted_quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double round_to_table_precision(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return std::strtod(buf, nullptr);
}

const char* kind_name(TableKind kind) { return kind == TableKind::Sncp ? "sncp" : "snhd"; }

}  // namespace

std::optional<std::size_t> confidence_index(double q) { return index_in(confidence_levels(), q); }

double lookup_critical_value(const CriticalValueTable& table, double epsilon, double q) {
  const auto qi = index_in(table.levels, q);
  if (!qi) throw TableError("confidence level " + std::to_string(q) + " is not in the table");
  const auto& eps = table.epsilons;
  if (eps.empty()) throw TableError("critical-value table is empty");
  if (auto hit = index_in(eps, epsilon)) return table.at(*hit, *qi);
  if (epsilon < eps.front() || epsilon > eps.back())
    throw TableError("trimming " + std::to_string(epsilon) + " lies outside the tabulated range");
  const auto upper = static_cast<std::size_t>(std::upper_bound(eps.begin(), eps.end(), epsilon) - eps.begin());
  const std::size_t lower = upper - 1;
  const double w = (epsilon - eps[lower]) / (eps[upper] - eps[lower]);
  return (1.0 - w) * table.at(lower, *qi) + w * table.at(upper, *qi);
}

// ---------------------------------------------------------------------------
// Null kernels

namespace {

// Closed-form interval normalizers for the mean functional. With P the
// partial sums of the series, the normalizer of [a, b] expands into sums of
// P_i P_i', P_i and i P_i over the interval, so each one costs O(d^2).
template <int D>
class MeanNullKernel {
 public:
  MeanNullKernel(const TimeSeriesMatrix& ts) : n_(ts.n()), d_(D > 0 ? D : ts.p()) {
    const int d = dim();
    np_ = detail::packed_size(d);
    rows_ = static_cast<std::size_t>(n_ + 1);
    const auto ud = static_cast<std::size_t>(d);
    // Column-major over t: component i of P_t is p_[i * rows_ + t].
    p_.assign(rows_ * ud, 0.0);
    g_.assign(rows_ * ud, 0.0);
    hp_.assign(rows_ * ud, 0.0);
    q_.assign(rows_ * np_, 0.0);
    for (std::size_t i = 0; i < ud; ++i) {
      const auto y = ts.column(static_cast<int>(i));
      double* p = &p_[i * rows_];
      double* g = &g_[i * rows_];
      double* hp = &hp_[i * rows_];
      for (std::size_t t = 1; t < rows_; ++t) {
        p[t] = p[t - 1] + y[t - 1];
        g[t] = g[t - 1] + p[t];
        hp[t] = hp[t - 1] + static_cast<double>(t) * p[t];
      }
    }
    std::size_t o = 0;
    for (std::size_t i = 0; i < ud; ++i)
      for (std::size_t j = 0; j <= i; ++j, ++o) {
        const double* pi = &p_[i * rows_];
        const double* pj = &p_[j * rows_];
        double* q = &q_[o * rows_];
        for (std::size_t t = 1; t < rows_; ++t) q[t] = q[t - 1] + pi[t] * pj[t];
      }
  }

  [[nodiscard]] int dim() const noexcept { return D > 0 ? D : d_; }

  // Means and packed normalizers of every interval of length m, in the
  // structure-of-arrays layout used by sweep_max: row c of theta (and row o
  // of sn) starts at c * stride, and column a - 1 belongs to [a, a + m - 1].
  void fill_intervals(int m, double* theta, double* sn, std::size_t stride) const {
    const int d = dim();
    const auto ud = static_cast<std::size_t>(d);
    const auto count = static_cast<std::size_t>(n_ - m + 1);
    const auto um = static_cast<std::size_t>(m);
    const double md = m;
    const double inv_m = 1.0 / md;
    const double tri = md * (md + 1.0) / 2.0;
    const double sum_l2 = md * (md + 1.0) * (2.0 * md + 1.0) / 6.0 / (md * md);
    std::vector<double>& scratch = buffers().scratch;
    if (scratch.size() < 3 * ud * count) scratch.resize(3 * ud * count);
    double* s_all = scratch.data();
    double* g_all = s_all + ud * count;
    double* u_all = g_all + ud * count;
    for (std::size_t i = 0; i < ud; ++i) {
      const double* p = &p_[i * rows_];
      const double* g = &g_[i * rows_];
      const double* hp = &hp_[i * rows_];
      double* s = s_all + i * count;
      double* gs = g_all + i * count;
      double* u = u_all + i * count;
      double* th = theta + i * stride;
      for (std::size_t a = 0; a < count; ++a) {
        // Interval [a + 1, a + m]: prefix rows a and a + m.
        s[a] = p[a + um] - p[a];
        gs[a] = g[a + um] - g[a];
        u[a] = (hp[a + um] - hp[a]) - static_cast<double>(a) * gs[a] - p[a] * tri;
        th[a] = s[a] * inv_m;
      }
    }
    std::size_t o = 0;
    for (std::size_t i = 0; i < ud; ++i)
      for (std::size_t j = 0; j <= i; ++j, ++o) {
        const double* q = &q_[o * rows_];
        const double* ci = &p_[i * rows_];
        const double* cj = &p_[j * rows_];
        const double* si = s_all + i * count;
        const double* sj = s_all + j * count;
        const double* gi = g_all + i * count;
        const double* gj = g_all + j * count;
        const double* ui = u_all + i * count;
        const double* uj = u_all + j * count;
        double* out = sn + o * stride;
        for (std::size_t a = 0; a < count; ++a)
          out[a] = (q[a + um] - q[a]) - gi[a] * cj[a] - ci[a] * gj[a] + md * ci[a] * cj[a] -
                   (ui[a] * sj[a] + si[a] * uj[a]) * inv_m + sum_l2 * si[a] * sj[a];
      }
  }

  // Largest window statistic over the whole series for window unit h.
  //
  // Interval tables are stored per length j h in structure-of-arrays form
  // (component-major, start index minor). For fixed (j1, j2) consecutive
  // split points k read consecutive starts on both sides, so kLanes windows
  // are factorized side by side and the inner loops vectorize across k.
  double sweep_max(int h) const {
    const int d = dim();
    const int jmax = n_ / h;
    const auto ud = static_cast<std::size_t>(d);
    std::vector<std::size_t> tbase(static_cast<std::size_t>(jmax + 1), 0);
    std::vector<std::size_t> sbase(static_cast<std::size_t>(jmax + 1), 0);
    std::vector<std::size_t> stride(static_cast<std::size_t>(jmax + 1), 0);
    std::size_t tsize = 0, ssize = 0;
    for (int j = 1; j <= jmax; ++j) {
      const auto uj = static_cast<std::size_t>(j);
      stride[uj] = static_cast<std::size_t>(n_ - j * h + 1 + kLanes);
      tbase[uj] = tsize;
      sbase[uj] = ssize;
      tsize += ud * stride[uj];
      ssize += np_ * stride[uj];
    }
    // Per-thread buffers survive across window units and replicates, which
    // avoids refaulting tens of megabytes per replicate. Stale padding lanes
    // are finite and never reported.
    Buffers& buf = buffers();
    if (buf.theta.size() < tsize) buf.theta.resize(tsize, 0.0);
    if (buf.sn.size() < ssize) buf.sn.resize(ssize, 0.0);
    double* theta = buf.theta.data();
    double* sn = buf.sn.data();
    for (int j = 1; j <= jmax; ++j) {
      const auto uj = static_cast<std::size_t>(j);
      fill_intervals(j * h, theta + tbase[uj], sn + sbase[uj], stride[uj]);
    }

    // Split points are processed in blocks so that the slices of every
    // table touched by one block stay in cache while all (j1, j2) pairs run.
    double best = 0.0;
    for (int kb = h; kb <= n_ - h; kb += kBlock) {
      const int kend = std::min(kb + kBlock - 1, n_ - h);
      for (int j1 = 1; j1 * h <= kend; ++j1) {
        const auto u1 = static_cast<std::size_t>(j1);
        const int lo = std::max(kb, j1 * h);
        for (int j2 = 1; j1 + j2 <= jmax; ++j2) {
          const auto u2 = static_cast<std::size_t>(j2);
          const int hi = std::min(kend, n_ - j2 * h);
          if (hi < lo) break;
          for (int k0 = lo; k0 <= hi; k0 += kLanes) {
            const Side left{theta + tbase[u1] + static_cast<std::size_t>(k0 - j1 * h),
                            sn + sbase[u1] + static_cast<std::size_t>(k0 - j1 * h), stride[u1], j1 * h,
                            k0 - j1 * h + 1};
            const Side right{theta + tbase[u2] + static_cast<std::size_t>(k0), sn + sbase[u2] + static_cast<std::size_t>(k0),
                             stride[u2], j2 * h, k0 + 1};
            best = std::max(best, batch(left, right, std::min(kLanes, hi - k0 + 1)));
          }
        }
      }
    }
    return best;
  }

 private:
  static constexpr int kLanes = 8;
  static constexpr int kBlock = 32;

  struct Buffers {
    std::vector<double> theta, sn, scratch;
  };
  static Buffers& buffers() {
    thread_local Buffers b;
    return b;
  }
  using Lanes = double __attribute__((vector_size(kLanes * sizeof(double))));

  // kLanes consecutive intervals of one length; element (c, v) is at c * stride + v.
  struct Side {
    const double* theta;
    const double* sn;
    std::size_t stride;
    int m;
    int start;  // 1-based first index of lane 0's interval
  };

  // Normalizer of [start, start + m - 1] summed term by term from the
  // partial sums. The closed form leaves rounding residue that dominates
  // the quadratic form when the matrix is singular by construction.
  void direct_normalizer(int start, int m, double* out) const {
    const int d = dim();
    const auto base = static_cast<std::size_t>(start - 1);
    const auto um = static_cast<std::size_t>(m);
    std::fill(out, out + np_, 0.0);
    std::vector<double> diff(static_cast<std::size_t>(d));
    const double inv_m2 = 1.0 / (static_cast<double>(m) * m);
    for (int l = 1; l < m; ++l) {
      const auto ul = static_cast<std::size_t>(l);
      const double w = static_cast<double>(l) * l * (m - l) * (m - l) * inv_m2;
      for (std::size_t i = 0; i < diff.size(); ++i) {
        const double* p = &p_[i * rows_];
        diff[i] = (p[base + ul] - p[base]) / l - (p[base + um] - p[base + ul]) / (m - l);
      }
      std::size_t o = 0;
      for (int i = 0; i < d; ++i)
        for (int j = 0; j <= i; ++j) out[o++] += w * diff[static_cast<std::size_t>(i)] * diff[static_cast<std::size_t>(j)];
    }
  }

  double lane(const Side& left, const Side& right, int v) const {
    const int d = dim();
    const auto ud = static_cast<std::size_t>(d);
    std::vector<double> buf(2 * (ud + np_) + ud + np_);
    double* tl = buf.data();
    double* sl = tl + ud;
    double* tr = sl + np_;
    double* sr = tr + ud;
    const auto uv = static_cast<std::size_t>(v);
    for (std::size_t c = 0; c < ud; ++c) {
      tl[c] = left.theta[c * left.stride + uv];
      tr[c] = right.theta[c * right.stride + uv];
    }
    if (detail::normalizer_rank_deficient(d, left.m, right.m)) {
      direct_normalizer(left.start + v, left.m, sl);
      direct_normalizer(right.start + v, right.m, sr);
    } else {
      for (std::size_t o = 0; o < np_; ++o) {
        sl[o] = left.sn[o * left.stride + uv];
        sr[o] = right.sn[o * right.stride + uv];
      }
    }
    return window(left.m, tl, sl, right.m, tr, sr, sr + np_);
  }

  // Maximum statistic over the first `lanes` windows of a batch.
  double batch(const Side& left, const Side& right, int lanes) const {
    const double w = static_cast<double>(left.m) * left.m * right.m * right.m / (left.m + right.m);
    double best = 0.0;
    if constexpr (D == 1) {
      for (int v = 0; v < lanes; ++v) {
        const double diff = left.theta[v] - right.theta[v];
        const double s = left.sn[v] + right.sn[v];
        if (s > 0.0) best = std::max(best, w * diff * diff / s);
      }
    } else if constexpr (D > 1) {
      if (detail::normalizer_rank_deficient(D, left.m, right.m)) {
        for (int v = 0; v < lanes; ++v) best = std::max(best, lane(left, right, v));
        return best;
      }
      constexpr auto pk = [](int i, int j) { return i * (i + 1) / 2 + j; };
      // Filled through a reference: returning a vector type by value trips
      // -Wpsabi on targets narrower than kLanes.
      Lanes x, z;
      auto load = [](Lanes& into, const Side& side, const double* base, int row) {
        std::memcpy(&into, base + static_cast<std::size_t>(row) * side.stride, sizeof into);
      };
      std::array<Lanes, D * (D + 1) / 2> l;
      std::array<Lanes, D> inv;
      std::array<Lanes, D> y;
      Lanes q = {};
      Lanes bad = {};
      const Lanes one = Lanes{} + 1.0;
      // Same singularity rule as the general quadratic form, so that weak
      // pivots take the pseudo-inverse path in both.
      Lanes pivot = {};
      for (int i = 0; i < D; ++i) {
        load(x, left, left.sn, pk(i, i));
        load(z, right, right.sn, pk(i, i));
        const Lanes s = x + z;
        pivot = s > pivot ? s : pivot;
      }
      pivot *= detail::kPivotRelative;
      for (int i = 0; i < D; ++i) {
        for (int j = 0; j <= i; ++j) {
          load(x, left, left.sn, pk(i, j));
          load(z, right, right.sn, pk(i, j));
          Lanes acc = x + z;
          for (int k = 0; k < j; ++k) acc -= l[pk(i, k)] * l[pk(j, k)];
          if (j < i) {
            l[pk(i, j)] = acc * inv[j];
          } else {
            const auto ok = acc > pivot;
            bad = ok ? bad : one;
            const Lanes safe = ok ? acc : one;
            Lanes root;
            for (int v = 0; v < kLanes; ++v) root[v] = std::sqrt(safe[v]);
            inv[i] = one / root;
          }
        }
        load(x, left, left.theta, i);
        load(z, right, right.theta, i);
        Lanes acc = x - z;
        for (int k = 0; k < i; ++k) acc -= l[pk(i, k)] * y[k];
        y[i] = acc * inv[i];
        q += y[i] * y[i];
      }
      for (int v = 0; v < lanes; ++v)
        best = std::max(best, bad[v] != 0.0 ? lane(left, right, v) : w * q[v]);
    } else {
      for (int v = 0; v < lanes; ++v) best = std::max(best, lane(left, right, v));
    }
    return best;
  }

  double window(int ml, const double* tl, const double* sl, int mr, const double* tr, const double* sr,
                double* scratch) const {
    const int d = dim();
    if constexpr (D == 1) {
      const double diff = tl[0] - tr[0];
      const double v = sl[0] + sr[0];
      const double w = static_cast<double>(ml) * ml * mr * mr / (ml + mr);
      return v > 0.0 ? w * diff * diff / v : 0.0;
    } else {
      double* diff = scratch;
      double* sum = scratch + d;
      for (int i = 0; i < d; ++i) diff[i] = tl[i] - tr[i];
      for (std::size_t i = 0; i < np_; ++i) sum[i] = sl[i] + sr[i];
      const double w = static_cast<double>(ml) * ml * mr * mr / (ml + mr);
      return w * detail::pseudo_quadratic(d, diff, sum, 0.0, detail::normalizer_rank_deficient(d, ml, mr));
    }
  }

  int n_;
  int d_;
  std::size_t np_ = 1;
  std::vector<double> p_, g_, hp_, q_;
  std::size_t rows_ = 0;
};

template <int D>
std::vector<double> mean_maxima(const TimeSeriesMatrix& ts, const std::vector<int>& hs) {
  const MeanNullKernel<D> kernel(ts);
  std::vector<double> out;
  out.reserve(hs.size());
  for (int h : hs) out.push_back(kernel.sweep_max(h));
  return out;
}

std::vector<double> mean_maxima_dispatch(const TimeSeriesMatrix& ts, const std::vector<int>& hs) {
  switch (ts.p()) {
    case 1: return mean_maxima<1>(ts, hs);
    case 2: return mean_maxima<2>(ts, hs);
    case 3: return mean_maxima<3>(ts, hs);
    case 4: return mean_maxima<4>(ts, hs);
    case 5: return mean_maxima<5>(ts, hs);
    case 6: return mean_maxima<6>(ts, hs);
    case 7: return mean_maxima<7>(ts, hs);
    case 8: return mean_maxima<8>(ts, hs);
    case 9: return mean_maxima<9>(ts, hs);
    case 10: return mean_maxima<10>(ts, hs);
    default: return mean_maxima<0>(ts, hs);
  }
}

std::vector<double> ustat_maxima(const TimeSeriesMatrix& ts, const std::vector<int>& hs) {
  const UStatEngine engine(ts);
  std::vector<double> out;
  out.reserve(hs.size());
  for (int h : hs) {
    const SweepResult r = engine.sweep(1, ts.n(), h, SweepOptions{false, 1});
    out.push_back(*std::max_element(r.max_stat.begin(), r.max_stat.end()));
  }
  return out;
}

}  // namespace

TimeSeriesMatrix null_replicate_data(TableKind, int d, int n_sim, std::uint64_t seed, std::uint64_t replicate) {
  if (d < 1) throw ParameterError("dimension must be positive");
  if (n_sim < 2) throw ParameterError("simulated length must be at least 2");
  Rng rng(seed, replicate);
  std::vector<double> values(static_cast<std::size_t>(n_sim) * static_cast<std::size_t>(d));
  for (int t = 0; t < n_sim; ++t)
    for (int j = 0; j < d; ++j)
      values[static_cast<std::size_t>(j) * static_cast<std::size_t>(n_sim) + static_cast<std::size_t>(t)] = rng.normal();
  return {n_sim, d, std::move(values)};
}

std::vector<double> null_replicate_maxima(TableKind kind, int d, int n_sim, std::uint64_t seed,
                                          std::uint64_t replicate, const std::vector<int>& window_sizes) {
  const TimeSeriesMatrix ts = null_replicate_data(kind, d, n_sim, seed, replicate);
  for (int h : window_sizes)
    if (h < 1 || 2 * h > n_sim) throw ConfigError("window size " + std::to_string(h) + " does not fit the simulated length");
  return kind == TableKind::Sncp ? mean_maxima_dispatch(ts, window_sizes) : ustat_maxima(ts, window_sizes);
}

CriticalValueTable simulate_null_table(TableKind kind, int d, const NullSimulationOptions& opts) {
  if (d < 1) throw ParameterError("dimension must be positive");
  if (kind == TableKind::Snhd && d < 2) throw ParameterError("the high-dimensional table needs p >= 2");
  if (opts.reps < 2) throw ParameterError("at least two replications are needed");
  CriticalValueTable table;
  table.kind = kind;
  table.d = d;
  table.n_sim = opts.n_sim;
  table.reps = opts.reps;
  table.seed = opts.seed;
  table.levels = confidence_levels();
  if (opts.epsilons.empty()) {
    table.epsilons = epsilon_grid();
  } else {
    for (double e : opts.epsilons) {
      const auto i = index_in(epsilon_grid(), e);
      if (!i) throw ConfigError("trimming " + std::to_string(e) + " is not on the table grid");
      table.epsilons.push_back(epsilon_grid()[*i]);
    }
    std::sort(table.epsilons.begin(), table.epsilons.end());
    table.epsilons.erase(std::unique(table.epsilons.begin(), table.epsilons.end()), table.epsilons.end());
  }
  const int min_window = kind == TableKind::Sncp ? 2 : kMinUStatSide;
  std::vector<int> hs;
  for (double e : table.epsilons) {
    const int h = grid_size_for(opts.n_sim, e);
    if (h < min_window)
      throw ConfigError("n_sim = " + std::to_string(opts.n_sim) + " gives window " + std::to_string(h) +
                        " at trimming " + std::to_string(e) + ", below the minimum of " + std::to_string(min_window));
    hs.push_back(h);
  }

  const std::size_t ne = hs.size();
  std::vector<double> maxima(static_cast<std::size_t>(opts.reps) * ne);
  std::mutex progress_mutex;
  int done = 0;
  detail::parallel_for(opts.reps, opts.threads, [&](int r, int) {
    const auto row = null_replicate_maxima(kind, d, opts.n_sim, opts.seed, static_cast<std::uint64_t>(r), hs);
    std::copy(row.begin(), row.end(), maxima.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(r) * ne));
    if (opts.progress) {
      std::lock_guard lock(progress_mutex);
      opts.progress(++done, opts.reps);
    }
  });

  table.values.reserve(ne * table.levels.size());
  std::vector<double> column(static_cast<std::size_t>(opts.reps));
  for (std::size_t i = 0; i < ne; ++i) {
    for (int r = 0; r < opts.reps; ++r)
      column[static_cast<std::size_t>(r)] = maxima[static_cast<std::size_t>(r) * ne + i];
    std::sort(column.begin(), column.end());
    for (double q : table.levels) table.values.push_back(round_to_table_precision(sorted_quantile(column, q)));
  }
  return table;
}

// ---------------------------------------------------------------------------
// Persistence

std::string format_table(const CriticalValueTable& table) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "SNTABLE kind=%s d=%d n_sim=%d reps=%d seed=%llu\n", kind_name(table.kind),
                table.d, table.n_sim, table.reps, static_cast<unsigned long long>(table.seed));
  out += buf;
  for (std::size_t i = 0; i < table.epsilons.size(); ++i)
    for (std::size_t j = 0; j < table.levels.size(); ++j) {
      std::snprintf(buf, sizeof buf, "%g %g %.10g\n", table.epsilons[i], table.levels[j], table.at(i, j));
      out += buf;
    }
  return out;
}

CriticalValueTable parse_table(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw TableError("critical-value table is empty");
  std::istringstream head(line);
  std::string magic;
  head >> magic;
  if (magic != "SNTABLE") throw TableError("not a critical-value table (missing SNTABLE header)");
  CriticalValueTable table;
  std::map<std::string, std::string> fields;
  for (std::string kv; head >> kv;) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw TableError("malformed header field '" + kv + "'");
    fields[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  try {
    const std::string& kind = fields.at("kind");
    if (kind == "sncp")
      table.kind = TableKind::Sncp;
    else if (kind == "snhd")
      table.kind = TableKind::Snhd;
    else
      throw TableError("unknown table kind '" + kind + "'");
    table.d = std::stoi(fields.at("d"));
    table.n_sim = std::stoi(fields.at("n_sim"));
    table.reps = std::stoi(fields.at("reps"));
    table.seed = std::stoull(fields.at("seed"));
  } catch (const TableError&) {
    throw;
  } catch (const std::exception&) {
    throw TableError("critical-value table header is incomplete: " + line);
  }

  std::map<double, std::map<double, double>> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream row(line);
    double eps = 0.0, q = 0.0, v = 0.0;
    std::string extra;
    if (!(row >> eps >> q >> v) || (row >> extra))
      throw TableError("malformed table row " + std::to_string(line_no) + ": " + line);
    if (!std::isfinite(v)) throw TableError("non-finite value on table row " + std::to_string(line_no));
    rows[eps][q] = v;
  }
  if (rows.empty()) throw TableError("critical-value table has no rows");
  for (const auto& [q, v] : rows.begin()->second) table.levels.push_back(q);
  const auto& expected = confidence_levels();
  if (table.levels.size() != expected.size() ||
      !std::equal(table.levels.begin(), table.levels.end(), expected.begin(),
                  [](double a, double b) { return std::abs(a - b) <= kGridTolerance; }))
    throw TableError("table rows must cover the confidence levels 0.9, 0.95, 0.99, 0.995 and 0.999");
  for (const auto& [eps, by_q] : rows) {
    if (by_q.size() != table.levels.size()) throw TableError("table rows do not cover every confidence level");
    table.epsilons.push_back(eps);
    std::size_t j = 0;
    for (const auto& [q, v] : by_q) {
      if (std::abs(q - table.levels[j++]) > kGridTolerance) throw TableError("inconsistent confidence levels in table");
      table.values.push_back(v);
    }
  }
  return table;
}

CriticalValueTable read_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TableError("cannot open critical-value table " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_table(buf.str());
}

void write_table(const CriticalValueTable& table, const std::filesystem::path& path) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw TableError("cannot write " + tmp.string());
    out << format_table(table);
    if (!out) throw TableError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw TableError("cannot move table into place at " + path.string() + ": " + ec.message());
}

std::string table_file_name(TableKind kind, int d) {
  return kind == TableKind::Sncp ? "sncp_d" + std::to_string(d) + ".tbl" : "snhd.tbl";
}

std::vector<std::filesystem::path> table_search_path() {
  std::vector<std::filesystem::path> dirs;
  if (const char* env = std::getenv("SNSEG_TABLE_DIR"); env && *env) dirs.emplace_back(env);
#ifdef SNSEG_SOURCE_TABLE_DIR
  dirs.emplace_back(SNSEG_SOURCE_TABLE_DIR);
#endif
#ifdef SNSEG_INSTALL_TABLE_DIR
  dirs.emplace_back(SNSEG_INSTALL_TABLE_DIR);
#endif
  return dirs;
}

const CriticalValueTable& load_table(TableKind kind, int d) {
  static std::mutex mutex;
  static std::map<std::pair<std::string, std::string>, CriticalValueTable> cache;
  if (kind == TableKind::Sncp && d < 1) throw TableError("table dimension must be positive");
  const std::string name = table_file_name(kind, d);
  std::lock_guard lock(mutex);
  for (const auto& dir : table_search_path()) {
    const auto path = dir / name;
    const auto key = std::make_pair(dir.string(), name);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
    if (!std::filesystem::exists(path)) continue;
    return cache.emplace(key, read_table(path)).first->second;
  }
  std::string msg = "no critical-value table " + name + " found";
  if (kind == TableKind::Sncp && d > 10)
    msg += "; tables are shipped for d <= 10 only. Generate one with `snseg critval --kind sncp --d " +
           std::to_string(d) + " --out <dir>/" + name + "` and point SNSEG_TABLE_DIR at <dir>";
  else
    msg += " (searched $SNSEG_TABLE_DIR and the built-in table directories)";
  throw TableError(msg);
}

}  // namespace snseg
