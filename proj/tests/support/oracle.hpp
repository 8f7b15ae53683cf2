#pragma once

// Brute-force reference implementations used only by the tests. Everything
// here is written from the defining formulas with plain loops and shares no
// code with the library beyond the public data types.

#include <optional>
#include <vector>

#include "snseg/types.hpp"

namespace oracle {

using snseg::ParameterSpec;
using snseg::TimeSeriesMatrix;

/// theta_hat on rows [a, b] (1-based, inclusive). nullopt when a component
/// is undefined there (too short, or a zero variance in a ratio).
std::optional<std::vector<double>> estimate(const ParameterSpec& spec, const TimeSeriesMatrix& ts, int a, int b);

/// Scaled contrast of the window (t1, k, t2).
std::optional<std::vector<double>> contrast(const ParameterSpec& spec, const TimeSeriesMatrix& ts, int t1, int k,
                                            int t2);

/// L + R summed term by term; dense d x d, row-major.
std::vector<double> normalizer(const ParameterSpec& spec, const TimeSeriesMatrix& ts, int t1, int k, int t2);

/// D' V^+ D with the pseudo-inverse taken from a singular value decomposition.
double statistic(const ParameterSpec& spec, const TimeSeriesMatrix& ts, int t1, int k, int t2);

/// Maximum over every (t1, t2) in [s, e] whose sides are multiples of h.
double max_statistic(const ParameterSpec& spec, const TimeSeriesMatrix& ts, int k, int h, int s, int e);

/// Quadruple sum over distinct index pairs on each side.
double u_contrast(const TimeSeriesMatrix& ts, int t1, int k, int t2);
/// Term-by-term sum of squared inner contrasts, over the full length n.
double u_normalizer(const TimeSeriesMatrix& ts, int t1, int k, int t2);

/// Adjusted Rand index by enumerating all pairs of time points.
double ari_by_pairs(const std::vector<int>& truth, const std::vector<int>& estimate, int n);

}  // namespace oracle
