#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "snseg/types.hpp"

namespace fixtures {

inline snseg::TimeSeriesMatrix noise(int n, int p, unsigned seed, double scale = 1.0) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> z(0.0, scale);
  std::vector<double> v(static_cast<std::size_t>(n) * static_cast<std::size_t>(p));
  for (double& x : v) x = z(gen);
  return {n, p, std::move(v)};
}

/// Small integers in [-range, range]; sums of products stay exact in doubles.
inline snseg::TimeSeriesMatrix integers(int n, int p, unsigned seed, int range = 5) {
  std::mt19937 gen(seed);
  std::uniform_int_distribution<int> u(-range, range);
  std::vector<double> v(static_cast<std::size_t>(n) * static_cast<std::size_t>(p));
  for (double& x : v) x = u(gen);
  return {n, p, std::move(v)};
}

inline snseg::TimeSeriesMatrix constant(int n, int p, double value = 3.0) {
  return {n, p, std::vector<double>(static_cast<std::size_t>(n) * static_cast<std::size_t>(p), value)};
}

/// Adds `shift` to every column from row `from` (1-based) on.
inline snseg::TimeSeriesMatrix with_shift(const snseg::TimeSeriesMatrix& ts, int from, double shift) {
  std::vector<double> v = ts.values();
  for (int j = 0; j < ts.p(); ++j)
    for (int t = from; t <= ts.n(); ++t)
      v[static_cast<std::size_t>(j) * static_cast<std::size_t>(ts.n()) + static_cast<std::size_t>(t - 1)] += shift;
  return {ts.n(), ts.p(), std::move(v)};
}

inline double rel_diff(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / scale;
}

}  // namespace fixtures
