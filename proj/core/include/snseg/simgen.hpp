#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "snseg/types.hpp"

namespace snseg {

/// xoshiro256** seeded through splitmix64. Independent streams come from
/// hashing (seed, stream) into the initial state, so replicate r of a study
/// always draws the same numbers regardless of thread scheduling.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }
  result_type operator()() noexcept { return next(); }

  std::uint64_t next() noexcept;
  /// Uniform on the open interval (0, 1), 53 bits.
  double uniform() noexcept;
  /// Standard normal by inversion of a uniform draw.
  double normal() noexcept;

 private:
  std::array<std::uint64_t, 4> s_{};
};

double normal_cdf(double x);
double normal_quantile(double u);

/// AR(1): X_t = rho X_{t-1} + s e_t with s = sqrt(1 - rho^2) when
/// unit_variance, else 1; X_0 is drawn from the stationary law.
std::vector<double> gen_ar1(int n, double rho, bool unit_variance, std::uint64_t seed);
std::vector<double> gen_ar1(int n, double rho, bool unit_variance, Rng& rng);

/// Quantile of the half truncated-normal, half generalized-Pareto mixture:
/// the normal quantile up to the median, a GPD(0, 2, 0.125) tail above it.
double gaugpd_quantile(double u);

enum class Model { V1, MP1, M2, HD, M, SA, AR1 };

std::string_view model_name(Model m);
Model parse_model(std::string_view name);

struct ModelSpec {
  Model model = Model::AR1;
  int n = 1000;
  double rho = 0.0;
  double delta = 0.0;          // SA mean level; M uses 2
  int p = 1;
  std::vector<int> cp_sets;    // segment boundaries, 0 first and n last

  /// Named model with the settings used in the reference study.
  static ModelSpec named(Model m);
};

struct SimulatedSeries {
  TimeSeriesMatrix ts;
  std::vector<int> change_points;  // interior boundaries of cp_sets
};

/// Throws ParameterError on inconsistent boundaries, |rho| >= 1 or bad sizes.
void validate(const ModelSpec& spec);

SimulatedSeries gen_model(const ModelSpec& spec, std::uint64_t seed, std::uint64_t stream = 0);

}  // namespace snseg
