#include "snseg/snhd.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <string>

#include "detail/parallel.hpp"

namespace snseg {

namespace {

void check_split(const TimeSeriesMatrix& ts, int t1, int k, int t2) {
  if (t1 < 1 || t2 > ts.n() || !(t1 <= k && k < t2))
    throw EstimatorError("window (" + std::to_string(t1) + ", " + std::to_string(k) + ", " +
                         std::to_string(t2) + ") is not a valid split of 1.." + std::to_string(ts.n()));
}

// Assembles the contrast from side sums: s_ll = |S_L|^2, q_l = sum |Y|^2 on the
// left, likewise on the right, and s_lr = S_L . S_R.
double assemble(double nl, double nr, double s_ll, double q_l, double s_rr, double q_r, double s_lr) {
  return nr * (nr - 1.0) * (s_ll - q_l) + nl * (nl - 1.0) * (s_rr - q_r) -
         2.0 * (nl - 1.0) * (nr - 1.0) * s_lr;
}

}  // namespace

double u_contrast(const TimeSeriesMatrix& ts, int t1, int k, int t2) {
  check_split(ts, t1, k, t2);
  if (k - t1 + 1 < 2 || t2 - k < 2)
    throw EstimatorError("the U-statistic contrast needs at least two rows on each side");
  const int p = ts.p();
  double s_ll = 0.0, s_rr = 0.0, s_lr = 0.0, q_l = 0.0, q_r = 0.0;
  for (int j = 0; j < p; ++j) {
    const auto col = ts.column(j);
    double sl = 0.0, sr = 0.0;
    for (int t = t1; t <= k; ++t) {
      const double y = col[static_cast<std::size_t>(t - 1)];
      sl += y;
      q_l += y * y;
    }
    for (int t = k + 1; t <= t2; ++t) {
      const double y = col[static_cast<std::size_t>(t - 1)];
      sr += y;
      q_r += y * y;
    }
    s_ll += sl * sl;
    s_rr += sr * sr;
    s_lr += sl * sr;
  }
  return assemble(k - t1 + 1, t2 - k, s_ll, q_l, s_rr, q_r, s_lr);
}

double u_self_normalizer(const TimeSeriesMatrix& ts, int t1, int k, int t2) {
  check_split(ts, t1, k, t2);
  double total = 0.0;
  for (int t = t1 + 1; t <= k - 2; ++t) {
    const double c = u_contrast(ts, t1, t, k);
    total += c * c;
  }
  for (int t = k + 2; t <= t2 - 2; ++t) {
    const double c = u_contrast(ts, k + 1, t, t2);
    total += c * c;
  }
  return total / ts.n();
}

double u_statistic(const TimeSeriesMatrix& ts, int t1, int k, int t2) {
  check_split(ts, t1, k, t2);
  if (k - t1 + 1 < kMinUStatSide || t2 - k < kMinUStatSide) return 0.0;
  const double v = u_self_normalizer(ts, t1, k, t2);
  if (!(v > 0.0)) return 0.0;
  const double d = u_contrast(ts, t1, k, t2);
  return d * d / v;
}

UStatEngine::UStatEngine(const TimeSeriesMatrix& ts) : n_(ts.n()) {
  const int p = ts.p();
  // Centring by the first row leaves every contrast unchanged and keeps the
  // prefix sums small for series far from the origin.
  Eigen::MatrixXd prefix = Eigen::MatrixXd::Zero(n_ + 1, p);
  norms_.assign(static_cast<std::size_t>(n_ + 1), 0.0);
  for (int t = 1; t <= n_; ++t) {
    double q = 0.0;
    for (int j = 0; j < p; ++j) {
      const double z = ts(t - 1, j) - ts(0, j);
      prefix(t, j) = prefix(t - 1, j) + z;
      q += z * z;
    }
    norms_[static_cast<std::size_t>(t)] = norms_[static_cast<std::size_t>(t - 1)] + q;
  }
  gram_ = Eigen::MatrixXd::Zero(n_ + 1, n_ + 1);
  gram_.selfadjointView<Eigen::Lower>().rankUpdate(prefix);
  gram_.triangularView<Eigen::StrictlyUpper>() = gram_.transpose();
}

double UStatEngine::contrast(int t1, int k, int t2) const noexcept {
  const int a = t1 - 1;
  const double s_ll = gram_(k, k) - 2.0 * gram_(k, a) + gram_(a, a);
  const double s_rr = gram_(t2, t2) - 2.0 * gram_(t2, k) + gram_(k, k);
  const double s_lr = gram_(k, t2) - gram_(k, k) - gram_(a, t2) + gram_(a, k);
  const auto nq = [&](int x) { return norms_[static_cast<std::size_t>(x)]; };
  return assemble(k - t1 + 1, t2 - k, s_ll, nq(k) - nq(a), s_rr, nq(t2) - nq(k), s_lr);
}

double UStatEngine::split_energy(int a, int b) const noexcept {
  double total = 0.0;
  for (int t = a + 1; t <= b - 2; ++t) {
    const double c = contrast(a, t, b);
    total += c * c;
  }
  return total;
}

double UStatEngine::statistic(int t1, int k, int t2) const noexcept {
  if (k - t1 + 1 < kMinUStatSide || t2 - k < kMinUStatSide) return 0.0;
  const double v = (split_energy(t1, k) + split_energy(k + 1, t2)) / n_;
  if (!(v > 0.0)) return 0.0;
  const double d = contrast(t1, k, t2);
  return d * d / v;
}

SweepResult UStatEngine::sweep(int s, int e, int h, const SweepOptions& opts) const {
  if (s < 1 || e > n_ || s >= e)
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
    // energy[offset(b) + j - 1] holds split_energy(b - j h + 1, b).
    std::vector<std::size_t> offset(static_cast<std::size_t>(len + 1), 0);
    for (int b = s; b <= e; ++b)
      offset[static_cast<std::size_t>(b - s + 1)] =
          offset[static_cast<std::size_t>(b - s)] + static_cast<std::size_t>((b - s + 1) / h);
    std::vector<double> energy(offset.back(), 0.0);
    detail::parallel_for(len, opts.threads, [&](int idx, int) {
      const int b = e - idx;
      const int jmax = (b - s + 1) / h;
      for (int j = 1; j <= jmax; ++j) {
        const int a = b - j * h + 1;
        const bool needed = b <= e - h || a >= s + h;
        if (needed && j * h >= kMinUStatSide)
          energy[offset[static_cast<std::size_t>(b - s)] + static_cast<std::size_t>(j - 1)] = split_energy(a, b);
      }
    });

    detail::parallel_for(k_hi - k_lo + 1, opts.threads, [&](int idx, int) {
      const int k = k_lo + idx;
      const int j1max = (k - s + 1) / h;
      const int j2max = (e - k) / h;
      double best = 0.0;
      std::vector<SweepRecord>* rec = opts.keep_records ? &per_k[static_cast<std::size_t>(k - s)] : nullptr;
      for (int j1 = 1; j1 <= j1max; ++j1) {
        const int t1 = k - j1 * h + 1;
        const double wl = energy[offset[static_cast<std::size_t>(k - s)] + static_cast<std::size_t>(j1 - 1)];
        for (int j2 = 1; j2 <= j2max; ++j2) {
          const int t2 = k + j2 * h;
          double stat = 0.0;
          if (j1 * h >= kMinUStatSide && j2 * h >= kMinUStatSide) {
            const double wr = energy[offset[static_cast<std::size_t>(t2 - s)] + static_cast<std::size_t>(j2 - 1)];
            const double v = (wl + wr) / n_;
            if (v > 0.0) {
              const double d = contrast(t1, k, t2);
              stat = d * d / v;
            }
          }
          best = std::max(best, stat);
          if (rec) rec->push_back({stat, k, t1, t2});
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

}  // namespace snseg
