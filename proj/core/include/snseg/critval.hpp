#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "snseg/types.hpp"

namespace snseg {

enum class TableKind { Sncp, Snhd };

/// Trimming values with tabulated critical values, ascending.
const std::vector<double>& epsilon_grid();
/// Supported confidence levels, ascending.
const std::vector<double>& confidence_levels();
/// Position of q in confidence_levels(), tolerant to decimal round-off.
std::optional<std::size_t> confidence_index(double q);

struct CriticalValueTable {
  TableKind kind = TableKind::Sncp;
  int d = 1;        // parameter dimension (SNCP) or series dimension p (SNHD)
  int n_sim = 1000;
  int reps = 20000;
  std::uint64_t seed = 1;
  std::vector<double> epsilons;
  std::vector<double> levels;
  std::vector<double> values;  // row-major: epsilons x levels

  [[nodiscard]] double at(std::size_t eps_index, std::size_t level_index) const {
    return values[eps_index * levels.size() + level_index];
  }
};

/// Exact value on a grid point, otherwise linear interpolation between the
/// bracketing trimming values at the same confidence level.
double lookup_critical_value(const CriticalValueTable& table, double epsilon, double q);

struct NullSimulationOptions {
  int n_sim = 1000;
  int reps = 20000;
  std::uint64_t seed = 1;
  int threads = 0;
  /// Subset of epsilon_grid() to simulate; empty means the full grid.
  std::vector<double> epsilons;
  /// Called with the number of finished replicates, from one thread at a time.
  std::function<void(int done, int total)> progress;
};

/// Monte Carlo quantiles of the maximal statistic under i.i.d. standard
/// normal data. For SNCP, d is the parameter dimension and the mean
/// functional is used; for SNHD, d is the series dimension p.
CriticalValueTable simulate_null_table(TableKind kind, int d, const NullSimulationOptions& opts);

/// The i.i.d. standard normal series of one null replicate (n_sim x d).
TimeSeriesMatrix null_replicate_data(TableKind kind, int d, int n_sim, std::uint64_t seed,
                                     std::uint64_t replicate);

/// Maximal statistic over the whole series for one null replicate, per
/// requested window size. Exposed for testing the simulation kernels.
std::vector<double> null_replicate_maxima(TableKind kind, int d, int n_sim, std::uint64_t seed,
                                          std::uint64_t replicate, const std::vector<int>& window_sizes);

std::string format_table(const CriticalValueTable& table);
CriticalValueTable parse_table(std::string_view text);
CriticalValueTable read_table(const std::filesystem::path& path);
void write_table(const CriticalValueTable& table, const std::filesystem::path& path);

/// "sncp_d3.tbl" or "snhd.tbl".
std::string table_file_name(TableKind kind, int d);
/// Directories searched for shipped tables: $SNSEG_TABLE_DIR, then the
/// source tree, then the install prefix.
std::vector<std::filesystem::path> table_search_path();
/// Loads (and memoizes) the table for the given kind; d is ignored for SNHD.
const CriticalValueTable& load_table(TableKind kind, int d);

}  // namespace snseg
