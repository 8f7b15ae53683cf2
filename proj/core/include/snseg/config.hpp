#pragma once

#include <optional>

#include "snseg/critval.hpp"
#include "snseg/types.hpp"

namespace snseg {

inline constexpr double kMinEpsilon = 0.05;
inline constexpr double kMaxEpsilon = 0.5;

/// Clamp into [0.05, 0.5], flagging which side was hit.
double clamp_epsilon(double epsilon, std::vector<ConfigWarning>* warnings = nullptr);

/// Window size floor(n * epsilon), guarded against decimal round-off.
int grid_size_for(int n, double epsilon);

/// A given grid size takes precedence over epsilon; the table supplies the
/// threshold at the resolved (clamped) trimming value.
SNConfig resolve_config(int n, std::optional<double> epsilon, std::optional<int> grid_size, double q,
                        int dim_d, const CriticalValueTable& table);

/// Same, with the shipped SNCP table for dimension dim_d.
SNConfig resolve_config(int n, std::optional<double> epsilon, std::optional<int> grid_size, double q,
                        int dim_d);

/// Same, with the shipped SNHD table; warns when p is below 10.
UStatConfig resolve_ustat_config(int n, int p, std::optional<double> epsilon,
                                 std::optional<int> grid_size, double q);

}  // namespace snseg
