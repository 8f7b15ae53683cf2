#pragma once

#include <functional>
#include <vector>

#include "snseg/functionals.hpp"
#include "snseg/snstat.hpp"
#include "snseg/types.hpp"

namespace snseg {

struct SegmentOptions {
  int threads = 0;
  /// Keep every window statistic of the top-level sweep.
  bool keep_records = true;
  /// Fill SegmentationResult::estimates.
  bool estimates = false;
};

/// Sweep over [s, e]; top is true only for the call on the whole series.
using SweepFunction = std::function<SweepResult(int s, int e, bool top)>;

struct RecursionOutcome {
  std::vector<int> est_cp;      // ascending
  std::vector<double> cp_stat;  // matching est_cp
  SweepResult top;
};

/// Binary recursion shared by both procedures: sweep [s, e], split at the
/// smallest maximizing k when the maximum exceeds the threshold, recurse on
/// [s, k] and [k+1, e], stop on segments shorter than 2h.
RecursionOutcome recursive_segmentation(int n, int h, double threshold, const SweepFunction& sweep);

SegmentationResult sncp_segment(const TimeSeriesMatrix& ts, const ParameterSpec& spec,
                                const SNConfig& config, const SegmentOptions& opts = {});

/// High-dimensional mean change-points; needs p >= 2.
SegmentationResult snhd_segment(const TimeSeriesMatrix& ts, const UStatConfig& config,
                                const SegmentOptions& opts = {});

/// Per-segment estimates, one entry per spec component. A degenerate or too
/// short segment yields NaN entries.
std::vector<ComponentEstimates> segment_estimates(const TimeSeriesMatrix& ts, const ParameterSpec& spec,
                                                  const std::vector<int>& est_cp);

}  // namespace snseg
