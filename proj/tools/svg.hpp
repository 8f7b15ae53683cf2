#pragma once

#include <string>
#include <vector>

#include "snseg/types.hpp"

namespace snseg::cli {

struct PlotData {
  const TimeSeriesMatrix* series = nullptr;
  std::vector<std::string> names;  // one per column, may be empty
  std::vector<int> est_cp;
  std::vector<double> stat;        // max statistic at k = 1..n
  double threshold = 0.0;
};

/// Series panels (at most kMaxSeriesPanels columns) with red verticals at the
/// change-points, then a statistic panel with the threshold in blue.
std::string render_svg(const PlotData& data);

inline constexpr int kMaxSeriesPanels = 4;

}  // namespace snseg::cli
