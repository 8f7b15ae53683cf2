#include "snseg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

#include "snseg/types.hpp"

namespace snseg {

namespace {

double one_sided(const std::vector<int>& from, const std::vector<int>& to) {
  double worst = 0.0;
  for (int x : from) {
    int best = std::numeric_limits<int>::max();
    for (int y : to) best = std::min(best, std::abs(x - y));
    worst = std::max(worst, static_cast<double>(best));
  }
  return worst;
}

// Segment label of every point 1..n for the given cut set.
std::vector<int> labels(std::vector<int> cps, int n) {
  std::sort(cps.begin(), cps.end());
  cps.erase(std::unique(cps.begin(), cps.end()), cps.end());
  std::vector<int> out(static_cast<std::size_t>(n));
  int seg = 0;
  std::size_t next = 0;
  for (int t = 1; t <= n; ++t) {
    out[static_cast<std::size_t>(t - 1)] = seg;
    while (next < cps.size() && cps[next] <= t) {
      if (cps[next] == t) ++seg;
      ++next;
    }
  }
  return out;
}

double choose2(double x) { return x * (x - 1.0) / 2.0; }

}  // namespace

HausdorffDistances hausdorff_distances(const std::vector<int>& truth, const std::vector<int>& estimate, int n) {
  HausdorffDistances out;
  if (truth.empty() && estimate.empty()) return out;
  if (estimate.empty()) {
    out.d2 = out.dh = n;
    return out;
  }
  if (truth.empty()) {
    out.d1 = out.dh = n;
    return out;
  }
  out.d1 = one_sided(estimate, truth);
  out.d2 = one_sided(truth, estimate);
  out.dh = std::max(out.d1, out.d2);
  return out;
}

double adjusted_rand_index(const std::vector<int>& truth, const std::vector<int>& estimate, int n) {
  if (n < 1) throw ParameterError("partition size must be positive");
  const auto a = labels(truth, n);
  const auto b = labels(estimate, n);
  const int ra = a.back() + 1;
  const int rb = b.back() + 1;
  std::vector<double> table(static_cast<std::size_t>(ra) * static_cast<std::size_t>(rb), 0.0);
  std::vector<double> row(static_cast<std::size_t>(ra), 0.0), col(static_cast<std::size_t>(rb), 0.0);
  for (int t = 0; t < n; ++t) {
    const auto i = static_cast<std::size_t>(a[static_cast<std::size_t>(t)]);
    const auto j = static_cast<std::size_t>(b[static_cast<std::size_t>(t)]);
    table[i * static_cast<std::size_t>(rb) + j] += 1.0;
    row[i] += 1.0;
    col[j] += 1.0;
  }
  double index = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (double v : table) index += choose2(v);
  for (double v : row) sum_a += choose2(v);
  for (double v : col) sum_b += choose2(v);
  const double total = choose2(n);
  const double expected = total > 0.0 ? sum_a * sum_b / total : 0.0;
  const double max_index = 0.5 * (sum_a + sum_b);
  const double denom = max_index - expected;
  if (denom == 0.0) return a == b ? 1.0 : 0.0;
  return (index - expected) / denom;
}

int ReplicationReport::count(int difference) const {
  const int idx = std::clamp(difference, -3, 3) + 3;
  return buckets[static_cast<std::size_t>(idx)];
}

double ReplicationReport::fraction(int difference) const {
  return runs > 0 ? static_cast<double>(count(difference)) / runs : 0.0;
}

ReplicationReport summarize_replications(const std::vector<ReplicationRun>& runs) {
  if (runs.empty()) throw ParameterError("no replications to summarize");
  ReplicationReport rep;
  rep.runs = static_cast<int>(runs.size());
  for (const auto& r : runs) {
    const int diff = static_cast<int>(r.estimate.size()) - static_cast<int>(r.truth.size());
    ++rep.buckets[static_cast<std::size_t>(std::clamp(diff, -3, 3) + 3)];
    const auto hd = hausdorff_distances(r.truth, r.estimate, r.n);
    rep.mean_ari += adjusted_rand_index(r.truth, r.estimate, r.n);
    rep.mean_d1 += hd.d1;
    rep.mean_d2 += hd.d2;
    rep.mean_dh += hd.dh;
    rep.total_seconds += r.seconds;
  }
  const double inv = 1.0 / rep.runs;
  rep.mean_ari *= inv;
  rep.mean_d1 *= inv;
  rep.mean_d2 *= inv;
  rep.mean_dh *= inv;
  return rep;
}

std::string format_report(const ReplicationReport& report, const std::string& label) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-12s", "setting");
  out += buf;
  for (const char* b : ReplicationReport::kBucketLabels) {
    std::snprintf(buf, sizeof buf, " %6s", b);
    out += buf;
  }
  out += "    ARI     d1     d2     dH   time\n";
  std::snprintf(buf, sizeof buf, "%-12s", label.c_str());
  out += buf;
  for (int c : report.buckets) {
    std::snprintf(buf, sizeof buf, " %6d", c);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, " %6.3f %6.2f %6.2f %6.2f %6.2f\n", report.mean_ari, report.mean_d1,
                report.mean_d2, report.mean_dh, report.runs > 0 ? report.total_seconds / report.runs : 0.0);
  out += buf;
  return out;
}

}  // namespace snseg
