#include "snseg/segmenter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "snseg/snhd.hpp"

namespace snseg {

namespace {

void check_config(int n, const SNConfig& config) {
  if (!(config.threshold > 0.0) || !std::isfinite(config.threshold))
    throw ConfigError("threshold is not resolved");
  if (config.grid_size < 1) throw ConfigError("grid size must be at least 1");
  if (config.grid_size >= n) throw ConfigError("grid size must be smaller than the series length");
}

}  // namespace

RecursionOutcome recursive_segmentation(int n, int h, double threshold, const SweepFunction& sweep) {
  RecursionOutcome out;
  std::vector<std::pair<int, double>> found;
  std::vector<std::pair<int, int>> stack{{1, n}};
  bool top = true;
  while (!stack.empty()) {
    const auto [s, e] = stack.back();
    stack.pop_back();
    if (e - s + 1 < 2 * h) {
      if (top) {
        out.top.s = s;
        out.top.e = e;
        out.top.max_stat.assign(static_cast<std::size_t>(e - s + 1), 0.0);
        top = false;
      }
      continue;
    }
    SweepResult res = sweep(s, e, top);
    const int k = res.argmax();
    const double stat = res.stat_at(k);
    if (top) {
      out.top = std::move(res);
      top = false;
    }
    if (!(stat > threshold)) continue;
    found.emplace_back(k, stat);
    stack.emplace_back(k + 1, e);
    stack.emplace_back(s, k);
  }
  std::sort(found.begin(), found.end());
  for (const auto& [k, stat] : found) {
    out.est_cp.push_back(k);
    out.cp_stat.push_back(stat);
  }
  return out;
}

SegmentationResult sncp_segment(const TimeSeriesMatrix& ts, const ParameterSpec& spec,
                                const SNConfig& config, const SegmentOptions& opts) {
  check_config(ts.n(), config);
  const Estimator est(spec, ts, EstimatorPath::Fast);
  const int h = config.grid_size;
  auto outcome = recursive_segmentation(ts.n(), h, config.threshold, [&](int s, int e, bool top) {
    return max_sweep(est, s, e, h, SweepOptions{top && opts.keep_records, opts.threads});
  });
  SegmentationResult result;
  result.method = Method::Sncp;
  result.est_cp = std::move(outcome.est_cp);
  result.cp_stat = std::move(outcome.cp_stat);
  result.sweep = std::move(outcome.top);
  result.config = config;
  result.spec = spec;
  if (opts.estimates) result.estimates = segment_estimates(ts, spec, result.est_cp);
  return result;
}

SegmentationResult snhd_segment(const TimeSeriesMatrix& ts, const UStatConfig& config,
                                const SegmentOptions& opts) {
  if (ts.p() < 2) throw ParameterError("the high-dimensional procedure needs p >= 2");
  check_config(ts.n(), config);
  const UStatEngine engine(ts);
  const int h = config.grid_size;
  auto outcome = recursive_segmentation(ts.n(), h, config.threshold, [&](int s, int e, bool top) {
    return engine.sweep(s, e, h, SweepOptions{top && opts.keep_records, opts.threads});
  });
  SegmentationResult result;
  result.method = Method::Snhd;
  result.est_cp = std::move(outcome.est_cp);
  result.cp_stat = std::move(outcome.cp_stat);
  result.sweep = std::move(outcome.top);
  result.config = config;
  if (opts.estimates) {
    // Segment means per coordinate.
    ComponentEstimates means{"mvmean", {}};
    int start = 1;
    auto bounds = result.est_cp;
    bounds.push_back(ts.n());
    for (int end : bounds) {
      std::vector<double> v(static_cast<std::size_t>(ts.p()), 0.0);
      for (int j = 0; j < ts.p(); ++j) {
        for (int t = start; t <= end; ++t) v[static_cast<std::size_t>(j)] += ts(t - 1, j);
        v[static_cast<std::size_t>(j)] /= end - start + 1;
      }
      means.per_segment.push_back(std::move(v));
      start = end + 1;
    }
    result.estimates.push_back(std::move(means));
  }
  return result;
}

std::vector<ComponentEstimates> segment_estimates(const TimeSeriesMatrix& ts, const ParameterSpec& spec,
                                                  const std::vector<int>& est_cp) {
  for (std::size_t i = 0; i < est_cp.size(); ++i) {
    if (est_cp[i] < 1 || est_cp[i] >= ts.n())
      throw ParameterError("change-point " + std::to_string(est_cp[i]) + " is outside 1.." + std::to_string(ts.n() - 1));
    if (i > 0 && est_cp[i] <= est_cp[i - 1]) throw ParameterError("change-points must be strictly increasing");
  }
  const Estimator est(spec, ts, EstimatorPath::Fast);
  auto ws = est.workspace();
  std::vector<ComponentEstimates> out;
  for (const Component& c : spec.components()) out.push_back({c.label(), {}});
  std::vector<double> theta(static_cast<std::size_t>(spec.dim()));
  auto bounds = est_cp;
  bounds.push_back(ts.n());
  int start = 1;
  for (int end : bounds) {
    const bool ok = est.estimate(start, end, theta.data(), ws);
    for (std::size_t c = 0; c < spec.components().size(); ++c) {
      const int off = spec.offset(c);
      const int dim = spec.components()[c].dim(ts.p());
      std::vector<double> v(static_cast<std::size_t>(dim), std::numeric_limits<double>::quiet_NaN());
      if (ok) std::copy_n(theta.begin() + off, dim, v.begin());
      out[c].per_segment.push_back(std::move(v));
    }
    start = end + 1;
  }
  return out;
}

}  // namespace snseg
