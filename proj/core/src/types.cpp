#include "snseg/types.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

namespace snseg {

TimeSeriesMatrix::TimeSeriesMatrix(int n, int p, std::vector<double> column_major)
    : n_(n), p_(p), values_(std::move(column_major)) {
  if (n < 2) throw ParameterError("time series needs at least 2 observations");
  if (p < 1) throw ParameterError("time series needs at least one component");
  if (values_.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(p))
    throw ParameterError("time series storage does not match n x p");
  for (double v : values_)
    if (!std::isfinite(v)) throw ParameterError("time series contains a non-finite value");
}

TimeSeriesMatrix TimeSeriesMatrix::univariate(std::vector<double> values) {
  const int n = static_cast<int>(values.size());
  return {n, 1, std::move(values)};
}

TimeSeriesMatrix TimeSeriesMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw ParameterError("time series has no rows");
  const int n = static_cast<int>(rows.size());
  const int p = static_cast<int>(rows.front().size());
  std::vector<double> values(static_cast<std::size_t>(n) * static_cast<std::size_t>(p));
  for (int t = 0; t < n; ++t) {
    if (static_cast<int>(rows[static_cast<std::size_t>(t)].size()) != p)
      throw ParameterError("ragged rows in time series");
    for (int j = 0; j < p; ++j)
      values[static_cast<std::size_t>(j) * static_cast<std::size_t>(n) + static_cast<std::size_t>(t)] =
          rows[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)];
  }
  return {n, p, std::move(values)};
}

TimeSeriesMatrix TimeSeriesMatrix::affine(double alpha, double beta) const {
  std::vector<double> v = values_;
  for (double& x : v) x = alpha * x + beta;
  return {n_, p_, std::move(v)};
}

Component Component::custom(GenericFunctional f) {
  Component c = of(ParamKind::Generic);
  c.generic = std::make_shared<const GenericFunctional>(std::move(f));
  return c;
}

int Component::dim(int p) const {
  switch (kind) {
    case ParamKind::MultivariateMean:
      return p;
    case ParamKind::CovarianceMatrix:
      return p * (p + 1) / 2;
    case ParamKind::Generic:
      return generic ? generic->output_dim : 0;
    default:
      return 1;
  }
}

int Component::min_support() const {
  switch (kind) {
    case ParamKind::Mean:
    case ParamKind::MultivariateMean:
    case ParamKind::Quantile:
      return 1;
    case ParamKind::Generic:
      return generic ? std::max(1, generic->min_support) : 1;
    default:
      return 2;
  }
}

bool Component::fast_path() const {
  return kind != ParamKind::Quantile && kind != ParamKind::Generic;
}

std::string Component::label() const {
  switch (kind) {
    case ParamKind::Mean:
      return "mean";
    case ParamKind::Variance:
      return "variance";
    case ParamKind::AcfLag1:
      return "acf";
    case ParamKind::BivariateCorrelation:
      return "bivcor";
    case ParamKind::Quantile: {
      std::ostringstream os;
      os << 'q' << level;
      return os.str();
    }
    case ParamKind::CovarianceMatrix:
      return "covariance";
    case ParamKind::MultivariateMean:
      return "mvmean";
    case ParamKind::Generic:
      return generic ? generic->name : "custom";
  }
  return "unknown";
}

ParameterSpec::ParameterSpec(std::vector<Component> components, int p)
    : components_(std::move(components)), p_(p) {
  if (components_.empty()) throw ParameterError("parameter list is empty");
  if (p < 1) throw ParameterError("series dimension must be positive");
  for (const Component& c : components_) {
    switch (c.kind) {
      case ParamKind::Mean:
      case ParamKind::Variance:
      case ParamKind::AcfLag1:
        if (p != 1) throw ParameterError(c.label() + " requires a univariate series (p = 1)");
        break;
      case ParamKind::Quantile:
        if (p != 1) throw ParameterError(c.label() + " requires a univariate series (p = 1)");
        if (!(c.level > 0.0 && c.level < 1.0))
          throw ParameterError("quantile level must lie in (0, 1)");
        break;
      case ParamKind::BivariateCorrelation:
        if (p != 2) throw ParameterError("bivcor requires exactly two series (p = 2)");
        break;
      case ParamKind::MultivariateMean:
      case ParamKind::CovarianceMatrix:
        if (p < 2) throw ParameterError(c.label() + " requires p >= 2");
        break;
      case ParamKind::Generic:
        if (!c.generic || !c.generic->fn) throw ParameterError("generic functional has no callable");
        if (c.generic->output_dim < 1) throw ParameterError("generic functional output_dim must be positive");
        if (c.generic->min_support < 1) throw ParameterError("generic functional min_support must be positive");
        break;
    }
    offsets_.push_back(dim_);
    dim_ += c.dim(p);
    min_support_ = std::max(min_support_, c.min_support());
  }
}

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t");
  std::string out(s.substr(b, e - b + 1));
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return out;
}

std::optional<double> parse_number(std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

ParameterSpec ParameterSpec::parse(std::string_view list, int p) {
  std::vector<Component> comps;
  std::size_t pos = 0;
  while (pos <= list.size()) {
    auto next = list.find(',', pos);
    if (next == std::string_view::npos) next = list.size();
    const std::string tok = trim(list.substr(pos, next - pos));
    pos = next + 1;
    if (tok.empty()) throw ParameterError("empty entry in parameter list");
    if (tok == "mean") {
      comps.push_back(p == 1 ? Component::mean() : Component::multivariate_mean());
    } else if (tok == "mvmean") {
      comps.push_back(Component::multivariate_mean());
    } else if (tok == "variance" || tok == "var") {
      comps.push_back(Component::variance());
    } else if (tok == "acf") {
      comps.push_back(Component::acf());
    } else if (tok == "bivcor") {
      comps.push_back(Component::bivariate_correlation());
    } else if (tok == "covariance" || tok == "cov") {
      comps.push_back(Component::covariance());
    } else {
      std::string_view num = tok;
      if (!num.empty() && num.front() == 'q') num.remove_prefix(1);
      auto level = parse_number(num);
      if (!level) throw ParameterError("unknown parameter '" + tok + "'");
      comps.push_back(Component::quantile(*level));
    }
    if (next == list.size()) break;
  }
  return {std::move(comps), p};
}

bool ParameterSpec::has_fast_path() const noexcept {
  return std::any_of(components_.begin(), components_.end(),
                     [](const Component& c) { return c.fast_path(); });
}

bool ParameterSpec::has_quantile() const noexcept {
  return std::any_of(components_.begin(), components_.end(),
                     [](const Component& c) { return c.kind == ParamKind::Quantile; });
}

std::string ParameterSpec::label() const {
  std::string out;
  for (const Component& c : components_) {
    if (!out.empty()) out += ',';
    out += c.label();
  }
  return out;
}

std::string_view describe(ConfigWarning w) {
  switch (w) {
    case ConfigWarning::EpsilonBelowMinimum:
      return "trimming parameter below 0.05 was set to 0.05";
    case ConfigWarning::EpsilonAboveMaximum:
      return "trimming parameter above 0.5 was set to 0.5";
    case ConfigWarning::DimensionBelowRecommended:
      return "series dimension below 10; high-dimensional results may be unreliable";
  }
  return "unknown warning";
}

std::span<const SweepRecord> SweepResult::records_for(int k) const {
  if (record_offsets.empty()) return {};
  const auto i = static_cast<std::size_t>(k - s);
  return {records.data() + record_offsets[i], record_offsets[i + 1] - record_offsets[i]};
}

int SweepResult::argmax() const {
  int best = s;
  double best_val = -1.0;
  for (std::size_t i = 0; i < max_stat.size(); ++i) {
    if (max_stat[i] > best_val) {
      best_val = max_stat[i];
      best = s + static_cast<int>(i);
    }
  }
  return best;
}

}  // namespace snseg
