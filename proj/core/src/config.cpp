#include "snseg/config.hpp"

#include <cmath>
#include <string>

namespace snseg {

double clamp_epsilon(double epsilon, std::vector<ConfigWarning>* warnings) {
  if (epsilon < kMinEpsilon) {
    if (warnings) warnings->push_back(ConfigWarning::EpsilonBelowMinimum);
    return kMinEpsilon;
  }
  if (epsilon > kMaxEpsilon) {
    if (warnings) warnings->push_back(ConfigWarning::EpsilonAboveMaximum);
    return kMaxEpsilon;
  }
  return epsilon;
}

int grid_size_for(int n, double epsilon) {
  // 0.29 * 100 evaluates to 28.999999999999996; the slack keeps such products whole.
  return static_cast<int>(std::floor(n * epsilon + 1e-9));
}

SNConfig resolve_config(int n, std::optional<double> epsilon, std::optional<int> grid_size, double q,
                        int dim_d, const CriticalValueTable& table) {
  if (n < 2) throw ConfigError("series length must be at least 2");
  if (!epsilon && !grid_size) throw ConfigError("either the trimming parameter or the grid size is required");
  if (!confidence_index(q)) throw ConfigError("confidence level " + std::to_string(q) + " is not supported");
  if (table.kind == TableKind::Sncp && table.d != dim_d)
    throw TableError("critical-value table is for d = " + std::to_string(table.d) + ", requested d = " +
                     std::to_string(dim_d));

  SNConfig cfg;
  cfg.confidence = confidence_levels()[*confidence_index(q)];
  if (grid_size) {
    if (*grid_size < 1) throw ConfigError("grid size must be at least 1");
    if (*grid_size >= n) throw ConfigError("grid size must be smaller than the series length");
    cfg.grid_size = *grid_size;
    cfg.epsilon = clamp_epsilon(static_cast<double>(*grid_size) / n, &cfg.warnings);
  } else {
    if (!std::isfinite(*epsilon) || *epsilon <= 0.0) throw ConfigError("trimming parameter must be positive");
    cfg.epsilon = clamp_epsilon(*epsilon, &cfg.warnings);
    cfg.grid_size = grid_size_for(n, cfg.epsilon);
    if (cfg.grid_size < 1) throw ConfigError("series is too short for trimming " + std::to_string(cfg.epsilon));
    if (cfg.grid_size >= n) throw ConfigError("grid size must be smaller than the series length");
  }
  cfg.threshold = lookup_critical_value(table, cfg.epsilon, cfg.confidence);
  return cfg;
}

SNConfig resolve_config(int n, std::optional<double> epsilon, std::optional<int> grid_size, double q,
                        int dim_d) {
  if (n < 2) throw ConfigError("series length must be at least 2");
  return resolve_config(n, epsilon, grid_size, q, dim_d, load_table(TableKind::Sncp, dim_d));
}

UStatConfig resolve_ustat_config(int n, int p, std::optional<double> epsilon,
                                 std::optional<int> grid_size, double q) {
  if (n < 2) throw ConfigError("series length must be at least 2");
  const CriticalValueTable& table = load_table(TableKind::Snhd, p);
  UStatConfig cfg = resolve_config(n, epsilon, grid_size, q, p, table);
  if (p < 10) cfg.warnings.push_back(ConfigWarning::DimensionBelowRecommended);
  return cfg;
}

}  // namespace snseg
