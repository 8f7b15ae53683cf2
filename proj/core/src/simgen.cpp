#include "snseg/simgen.hpp"

#include <algorithm>
#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <string>

namespace snseg {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) noexcept {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) noexcept {
  std::uint64_t mix = seed;
  const std::uint64_t a = splitmix64(mix);
  std::uint64_t key = a ^ (stream * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL);
  const std::uint64_t b = splitmix64(key);
  std::uint64_t x = a ^ rotl(b, 29);
  for (auto& word : s_) word = splitmix64(x);
  if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
}

std::uint64_t Rng::next() noexcept {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() noexcept {
  return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() noexcept { return normal_quantile(uniform()); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double u) {
  if (!(u > 0.0 && u < 1.0)) throw ParameterError("normal quantile needs u in (0, 1)");
  return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * u);
}

std::vector<double> gen_ar1(int n, double rho, bool unit_variance, Rng& rng) {
  if (!(std::abs(rho) < 1.0)) throw ParameterError("AR coefficient must satisfy |rho| < 1");
  if (n < 1) throw ParameterError("series length must be positive");
  const double scale = unit_variance ? std::sqrt(1.0 - rho * rho) : 1.0;
  const double stationary_sd = scale / std::sqrt(1.0 - rho * rho);
  std::vector<double> x(static_cast<std::size_t>(n));
  double prev = stationary_sd * rng.normal();
  for (auto& v : x) {
    v = rho * prev + scale * rng.normal();
    prev = v;
  }
  return x;
}

std::vector<double> gen_ar1(int n, double rho, bool unit_variance, std::uint64_t seed) {
  Rng rng(seed);
  return gen_ar1(n, rho, unit_variance, rng);
}

double gaugpd_quantile(double u) {
  if (!(u > 0.0 && u < 1.0)) throw ParameterError("mixture quantile needs u in (0, 1)");
  constexpr double kHalf = 0.5;
  if (u <= kHalf) return normal_quantile(u);
  constexpr double mu = 0.0;
  constexpr double sigma = 2.0;
  constexpr double xi = 0.125;
  const double v = (u - kHalf) / (1.0 - kHalf);
  return mu + sigma * (std::pow(1.0 - v, -xi) - 1.0) / xi;
}

std::string_view model_name(Model m) {
  switch (m) {
    case Model::V1: return "V1";
    case Model::MP1: return "MP1";
    case Model::M2: return "M2";
    case Model::HD: return "HD";
    case Model::M: return "M";
    case Model::SA: return "SA";
    case Model::AR1: return "AR1";
  }
  return "?";
}

Model parse_model(std::string_view name) {
  for (Model m : {Model::V1, Model::MP1, Model::M2, Model::HD, Model::M, Model::SA, Model::AR1})
    if (model_name(m) == name) return m;
  throw ParameterError("unknown model '" + std::string(name) + "' (expected V1, MP1, M2, HD, M, SA or AR1)");
}

ModelSpec ModelSpec::named(Model m) {
  ModelSpec s;
  s.model = m;
  switch (m) {
    case Model::V1:
      s.n = 1024;
      s.rho = 0.5;
      s.cp_sets = {0, 400, 750, 1024};
      break;
    case Model::MP1:
      s.n = 1000;
      s.rho = 0.2;
      s.cp_sets = {0, 333, 667, 1000};
      break;
    case Model::M2:
      s.n = 1000;
      s.rho = 0.5;
      s.p = 5;
      s.cp_sets = {0, 75, 375, 425, 525, 575, 1000};
      break;
    case Model::HD:
      s.n = 600;
      s.p = 100;
      s.cp_sets = {0, 100, 200, 300, 400, 500, 600};
      break;
    case Model::M:
      s.n = 1000;
      s.delta = 2.0;
      s.cp_sets = {0, 200, 400, 600, 800, 1000};
      break;
    case Model::SA:
      s.n = 1200;
      s.rho = 0.5;
      s.delta = std::sqrt(3.0);
      s.cp_sets = {0, 150, 300, 450, 600, 750, 900, 1050, 1200};
      break;
    case Model::AR1:
      s.n = 1000;
      s.cp_sets = {0, 1000};
      break;
  }
  return s;
}

void validate(const ModelSpec& spec) {
  if (spec.n < 2) throw ParameterError("model length must be at least 2");
  if (spec.p < 1) throw ParameterError("model dimension must be positive");
  if (!(std::abs(spec.rho) < 1.0)) throw ParameterError("AR coefficient must satisfy |rho| < 1");
  if (!std::isfinite(spec.delta)) throw ParameterError("mean shift must be finite");
  const auto& cp = spec.cp_sets;
  if (cp.size() < 2 || cp.front() != 0 || cp.back() != spec.n)
    throw ParameterError("segment boundaries must start at 0 and end at n");
  for (std::size_t i = 1; i < cp.size(); ++i)
    if (cp[i] <= cp[i - 1]) throw ParameterError("segment boundaries must be strictly increasing");
  if (spec.model != Model::M2 && spec.model != Model::HD && spec.p != 1)
    throw ParameterError(std::string(model_name(spec.model)) + " is univariate");
}

SimulatedSeries gen_model(const ModelSpec& spec, std::uint64_t seed, std::uint64_t stream) {
  validate(spec);
  Rng rng(seed, stream);
  const int n = spec.n;
  const int p = spec.p;
  const std::size_t segments = spec.cp_sets.size() - 1;
  std::vector<int> segment_of(static_cast<std::size_t>(n));
  for (std::size_t sgm = 0; sgm < segments; ++sgm)
    for (int t = spec.cp_sets[sgm]; t < spec.cp_sets[sgm + 1]; ++t) segment_of[static_cast<std::size_t>(t)] = static_cast<int>(sgm);

  std::vector<double> values(static_cast<std::size_t>(n) * static_cast<std::size_t>(p));
  auto at = [&](int t, int j) -> double& {
    return values[static_cast<std::size_t>(j) * static_cast<std::size_t>(n) + static_cast<std::size_t>(t)];
  };

  switch (spec.model) {
    case Model::V1: {
      // Innovation scale doubles on every second segment; the recursion runs through.
      const double rho = spec.rho;
      double prev = rng.normal() / std::sqrt(1.0 - rho * rho);
      for (int t = 0; t < n; ++t) {
        const double scale = segment_of[static_cast<std::size_t>(t)] % 2 == 1 ? 2.0 : 1.0;
        prev = rho * prev + scale * rng.normal();
        at(t, 0) = prev;
      }
      break;
    }
    case Model::MP1: {
      const auto x = gen_ar1(n, spec.rho, true, rng);
      for (int t = 0; t < n; ++t) {
        const double v = x[static_cast<std::size_t>(t)];
        at(t, 0) = segment_of[static_cast<std::size_t>(t)] % 2 == 1 ? gaugpd_quantile(normal_cdf(v)) : v;
      }
      break;
    }
    case Model::M2: {
      static constexpr std::array<double, 6> kLevels = {-3.0, 0.0, 3.0, 0.0, -3.0, 0.0};
      const double unit = 1.0 / std::sqrt(static_cast<double>(p));
      for (int j = 0; j < p; ++j) {
        const auto x = gen_ar1(n, spec.rho, false, rng);
        for (int t = 0; t < n; ++t)
          at(t, j) = x[static_cast<std::size_t>(t)] +
                     kLevels[static_cast<std::size_t>(segment_of[static_cast<std::size_t>(t)]) % kLevels.size()] * unit;
      }
      break;
    }
    case Model::HD: {
      const double shift = std::sqrt(0.8);
      const int support = std::min(5, p);
      for (int t = 0; t < n; ++t) {
        const bool raised = segment_of[static_cast<std::size_t>(t)] % 2 == 1;
        for (int j = 0; j < p; ++j) at(t, j) = rng.normal() + (raised && j < support ? shift : 0.0);
      }
      break;
    }
    case Model::M:
    case Model::SA:
    case Model::AR1: {
      const auto x = gen_ar1(n, spec.rho, true, rng);
      for (int t = 0; t < n; ++t)
        at(t, 0) = x[static_cast<std::size_t>(t)] + (segment_of[static_cast<std::size_t>(t)] % 2 == 1 ? spec.delta : 0.0);
      break;
    }
  }

  SimulatedSeries out{TimeSeriesMatrix(n, p, std::move(values)), {}};
  out.change_points.assign(spec.cp_sets.begin() + 1, spec.cp_sets.end() - 1);
  return out;
}

}  // namespace snseg
