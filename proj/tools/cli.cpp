#include "snseg_cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <ostream>
#include <sstream>

#include "snseg/config.hpp"
#include "snseg/critval.hpp"
#include "snseg/csv.hpp"
#include "snseg/metrics.hpp"
#include "snseg/segmenter.hpp"
#include "snseg/simgen.hpp"
#include "svg.hpp"

namespace snseg::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

void write_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << content;
    out.flush();
    if (!out) throw Error("write failed for " + path.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error("cannot move output into place at " + path.string());
  }
}

Json nullable(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

// What to run and how to configure it; shared by segment and evaluate.
struct MethodSettings {
  bool hd = false;
  std::string params = "mean";
  std::optional<double> epsilon;
  std::optional<int> grid_size;
  double confidence = 0.9;
  int threads = 0;
};

struct Resolved {
  SNConfig config;
  std::optional<ParameterSpec> spec;
};

Resolved resolve(const MethodSettings& m, int n, int p) {
  if (m.epsilon && m.grid_size) throw ConfigError("give either an epsilon or a grid size, not both");
  if (!m.epsilon && !m.grid_size) {
    MethodSettings with_default = m;
    with_default.epsilon = kMinEpsilon;
    return resolve(with_default, n, p);
  }
  Resolved r;
  if (m.hd) {
    r.config = resolve_ustat_config(n, p, m.epsilon, m.grid_size, m.confidence);
  } else {
    r.spec = ParameterSpec::parse(m.params, p);
    r.config = resolve_config(n, m.epsilon, m.grid_size, m.confidence, r.spec->dim());
  }
  return r;
}

SegmentationResult segment_with(const TimeSeriesMatrix& ts, const Resolved& r, const MethodSettings& m,
                                 bool keep_records, bool estimates) {
  const SegmentOptions opts{m.threads, keep_records, estimates};
  return m.hd ? snhd_segment(ts, r.config, opts) : sncp_segment(ts, *r.spec, r.config, opts);
}

// Full-length per-k maxima; split points outside the sweep range are 0.
std::vector<double> stat_by_k(const SegmentationResult& res, int n) {
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  for (int k = res.sweep.s; k <= res.sweep.e; ++k) out[static_cast<std::size_t>(k - 1)] = res.sweep.stat_at(k);
  return out;
}

Json result_document(const SegmentationResult& res, const TimeSeriesMatrix& ts, const MethodSettings& m) {
  Json doc;
  doc["schema"] = 1;
  doc["method"] = m.hd ? "snhd" : "sncp";
  doc["params"] = m.hd ? std::string("mvmean") : res.spec->label();
  doc["n"] = ts.n();
  doc["p"] = ts.p();
  doc["epsilon"] = res.config.epsilon;
  doc["grid_size"] = res.config.grid_size;
  doc["confidence"] = res.config.confidence;
  doc["critical_value"] = res.config.threshold;
  Json warnings = Json::array();
  for (ConfigWarning w : res.config.warnings) warnings.push_back(std::string(describe(w)));
  doc["warnings"] = warnings;
  doc["est_cp"] = res.est_cp;
  Json stats = Json::array();
  for (double v : res.cp_stat) stats.push_back(nullable(v));
  doc["cp_stat"] = stats;
  if (!res.estimates.empty()) {
    Json est = Json::object();
    for (const ComponentEstimates& c : res.estimates) {
      Json segs = Json::array();
      for (const auto& seg : c.per_segment) {
        Json row = Json::array();
        for (double v : seg) row.push_back(nullable(v));
        segs.push_back(row);
      }
      est[c.label] = segs;
    }
    doc["estimates"] = est;
  }
  Json max_stat = Json::array();
  for (double v : stat_by_k(res, ts.n())) max_stat.push_back(nullable(v));
  doc["max_stat"] = max_stat;
  return doc;
}

std::string sweep_csv(const std::vector<double>& stat) {
  std::string out = "k,max_stat\n";
  char buf[64];
  for (std::size_t i = 0; i < stat.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i + 1, stat[i]);
    out += buf;
  }
  return out;
}

// Settings a model is usually evaluated with.
MethodSettings default_method(Model m) {
  MethodSettings s;
  s.epsilon = 0.05;
  switch (m) {
    case Model::V1: s.params = "variance"; break;
    case Model::MP1:
      s.params = "variance,q0.9";
      s.epsilon = 0.10;
      break;
    case Model::M2: s.params = "mvmean"; break;
    case Model::HD: s.hd = true; break;
    default: s.params = "mean"; break;
  }
  return s;
}

void apply_method_config(MethodSettings& s, const std::string& source) {
  Json j;
  try {
    if (!source.empty() && source.front() == '{') {
      j = Json::parse(source);
    } else {
      std::ifstream in(source);
      if (!in) throw ConfigError("cannot read method config " + source);
      j = Json::parse(in);
    }
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("method config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("method config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "hd") {
        s.hd = value.get<bool>();
      } else if (key == "params") {
        s.params = value.get<std::string>();
      } else if (key == "epsilon") {
        s.epsilon = value.get<double>();
        s.grid_size.reset();
      } else if (key == "grid_size") {
        s.grid_size = value.get<int>();
        s.epsilon.reset();
      } else if (key == "confidence") {
        s.confidence = value.get<double>();
      } else if (key == "threads") {
        s.threads = value.get<int>();
      } else {
        throw ConfigError("unknown method config key '" + key + "'");
      }
    } catch (const Json::exception&) {
      throw ConfigError("method config key '" + key + "' has the wrong type");
    }
  }
}

fs::path truth_path_for(const fs::path& csv) {
  fs::path p = csv;
  p.replace_extension(".truth.json");
  return p;
}

struct SegmentArgs {
  std::string input;
  std::string output;
  std::string plot;
  std::string sweep_out;
  bool estimates = false;
  MethodSettings method;
  std::optional<double> epsilon;
  std::optional<int> grid_size;
};

int cmd_segment(const SegmentArgs& a, std::ostream& out) {
  const CsvTable csv = read_csv(a.input);
  const TimeSeriesMatrix& ts = csv.data;
  MethodSettings m = a.method;
  m.epsilon = a.epsilon;
  m.grid_size = a.grid_size;
  const Resolved r = resolve(m, ts.n(), ts.p());
  const SegmentationResult res = segment_with(ts, r, m, false, a.estimates);
  const Json doc = result_document(res, ts, m);
  const std::string text = doc.dump(2) + "\n";

  if (!a.sweep_out.empty()) write_atomic(a.sweep_out, sweep_csv(stat_by_k(res, ts.n())));
  if (!a.plot.empty()) {
    PlotData plot;
    plot.series = &ts;
    plot.names = csv.header;
    plot.est_cp = res.est_cp;
    plot.stat = stat_by_k(res, ts.n());
    plot.threshold = res.config.threshold;
    write_atomic(a.plot, render_svg(plot));
  }
  if (a.output.empty()) {
    out << text;
  } else {
    write_atomic(a.output, text);
    out << "change-points:";
    if (res.est_cp.empty()) out << " none";
    for (int k : res.est_cp) out << ' ' << k;
    out << "\n";
  }
  return 0;
}

struct CritvalArgs {
  std::string kind = "sncp";
  int d = 0;
  int nsim = 1000;
  int reps = 20000;
  std::uint64_t seed = 1;
  int threads = 0;
  std::vector<double> epsilons;
  std::string out;
  bool quiet = false;
};

int cmd_critval(const CritvalArgs& a, std::ostream& out, std::ostream& err) {
  TableKind kind;
  if (a.kind == "sncp")
    kind = TableKind::Sncp;
  else if (a.kind == "snhd")
    kind = TableKind::Snhd;
  else
    throw ParameterError("unknown table kind '" + a.kind + "' (expected sncp or snhd)");
  const int d = a.d > 0 ? a.d : (kind == TableKind::Sncp ? 1 : 50);
  fs::path target = a.out;
  if (target.empty() || fs::is_directory(target)) target /= table_file_name(kind, d);

  NullSimulationOptions opts;
  opts.n_sim = a.nsim;
  opts.reps = a.reps;
  opts.seed = a.seed;
  opts.threads = a.threads;
  opts.epsilons = a.epsilons;
  if (!a.quiet) {
    const int step = std::max(1, a.reps / 20);
    opts.progress = [&err, step](int done, int total) {
      if (done % step == 0 || done == total) err << "replications " << done << "/" << total << "\n";
    };
  }
  const auto start = std::chrono::steady_clock::now();
  const CriticalValueTable table = simulate_null_table(kind, d, opts);
  write_atomic(target, format_table(table));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out << "wrote " << target.string() << " (" << table.epsilons.size() << " trimming values, " << a.reps
      << " replications, " << secs << " s)\n";
  return 0;
}

struct SimulateArgs {
  std::string model;
  std::uint64_t seed = 1;
  std::uint64_t stream = 0;
  std::optional<int> n;
  std::optional<double> rho;
  std::string out;
};

ModelSpec model_spec(const std::string& name, std::optional<int> n, std::optional<double> rho) {
  ModelSpec spec = ModelSpec::named(parse_model(name));
  if (rho) spec.rho = *rho;
  if (n) {
    // Rescale the boundaries to the requested length.
    const int old_n = spec.n;
    for (int& b : spec.cp_sets)
      b = static_cast<int>(std::llround(static_cast<double>(b) * *n / old_n));
    spec.n = *n;
  }
  validate(spec);
  return spec;
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  const ModelSpec spec = model_spec(a.model, a.n, a.rho);
  const SimulatedSeries sim = gen_model(spec, a.seed, a.stream);
  std::vector<std::string> header;
  for (int j = 1; j <= sim.ts.p(); ++j) header.push_back(sim.ts.p() == 1 ? "y" : "y" + std::to_string(j));
  Json truth;
  truth["schema"] = 1;
  truth["model"] = std::string(model_name(spec.model));
  truth["n"] = spec.n;
  truth["p"] = sim.ts.p();
  truth["rho"] = spec.rho;
  truth["seed"] = a.seed;
  truth["stream"] = a.stream;
  truth["cp_sets"] = spec.cp_sets;
  truth["change_points"] = sim.change_points;
  const fs::path truth_path = truth_path_for(a.out);
  write_atomic(a.out, format_csv(sim.ts, header));
  write_atomic(truth_path, truth.dump(2) + "\n");
  out << "wrote " << a.out << " (" << sim.ts.n() << " x " << sim.ts.p() << ") and " << truth_path.string()
      << "\n";
  return 0;
}

struct EvaluateArgs {
  std::string model;
  std::optional<double> rho;
  std::optional<int> n;
  int reps = 100;
  std::uint64_t seed = 1;
  std::string method_config;
  std::optional<std::string> params;
  bool hd = false;
  std::optional<double> epsilon;
  std::optional<int> grid_size;
  std::optional<double> confidence;
  int threads = 0;
};

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
  const ModelSpec spec = model_spec(a.model, a.n, a.rho);
  MethodSettings m = default_method(spec.model);
  if (!a.method_config.empty()) apply_method_config(m, a.method_config);
  if (a.params) {
    m.params = *a.params;
    m.hd = false;
  }
  if (a.hd) m.hd = true;
  if (a.epsilon) {
    m.epsilon = a.epsilon;
    m.grid_size.reset();
  }
  if (a.grid_size) {
    m.grid_size = a.grid_size;
    m.epsilon.reset();
  }
  if (a.confidence) m.confidence = *a.confidence;
  m.threads = a.threads;
  if (a.reps < 1) throw ConfigError("--reps must be positive");

  const Resolved r = resolve(m, spec.n, spec.p);
  std::vector<ReplicationRun> runs;
  runs.reserve(static_cast<std::size_t>(a.reps));
  for (int rep = 0; rep < a.reps; ++rep) {
    const SimulatedSeries sim = gen_model(spec, a.seed, static_cast<std::uint64_t>(rep));
    const auto start = std::chrono::steady_clock::now();
    const SegmentationResult res = segment_with(sim.ts, r, m, false, false);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    runs.push_back({sim.change_points, res.est_cp, spec.n, secs});
  }
  const ReplicationReport report = summarize_replications(runs);
  std::ostringstream label;
  label << model_name(spec.model) << " rho=" << spec.rho << ' ' << (m.hd ? std::string("snhd") : r.spec->label())
        << " eps=" << r.config.epsilon << " q=" << r.config.confidence;
  out << format_report(report, label.str());
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Self-normalized change-point segmentation"};
  app.name("snseg");
  app.require_subcommand(1);

  SegmentArgs seg;
  auto* segment = app.add_subcommand("segment", "segment a CSV series and write a JSON result");
  segment->add_option("--input", seg.input, "CSV file, one row per time point")->required();
  segment->add_option("--params", seg.method.params, "comma list: mean, variance, acf, bivcor, covariance, mvmean, q<level>");
  segment->add_flag("--hd", seg.method.hd, "high-dimensional mean procedure (U-statistic)");
  segment->add_option("--confidence", seg.method.confidence, "confidence level of the threshold");
  auto* seg_eps = segment->add_option("--epsilon", seg.epsilon, "trimming parameter");
  segment->add_option("--grid-size", seg.grid_size, "window size h")->excludes(seg_eps);
  segment->add_flag("--estimates", seg.estimates, "include per-segment estimates");
  segment->add_option("--plot", seg.plot, "write an SVG plot");
  segment->add_option("--sweep-out", seg.sweep_out, "write per-k maxima as CSV");
  segment->add_option("--output", seg.output, "JSON result path (default: stdout)");
  segment->add_option("--threads", seg.method.threads, "worker threads (0 = all cores)");

  CritvalArgs cv;
  auto* critval = app.add_subcommand("critval", "simulate a critical-value table");
  critval->add_option("--kind", cv.kind, "sncp or snhd")->required();
  critval->add_option("--d", cv.d, "parameter dimension (sncp) or series dimension (snhd, default 50)");
  critval->add_option("--nsim", cv.nsim, "simulated series length");
  critval->add_option("--reps", cv.reps, "number of replications");
  critval->add_option("--seed", cv.seed, "master seed");
  critval->add_option("--threads", cv.threads, "worker threads (0 = all cores)");
  critval->add_option("--epsilon", cv.epsilons, "restrict to these trimming values (repeatable)");
  critval->add_option("--out", cv.out, "output file or directory")->required();
  critval->add_flag("--quiet", cv.quiet, "no progress output");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "generate a series from a named model");
  simulate->add_option("--model", sim.model, "V1, MP1, M2, HD, M, SA or AR1")->required();
  simulate->add_option("--seed", sim.seed, "seed");
  simulate->add_option("--stream", sim.stream, "stream index (replicate number)");
  simulate->add_option("--n", sim.n, "series length (boundaries are rescaled)");
  simulate->add_option("--rho", sim.rho, "AR(1) coefficient");
  simulate->add_option("--out", sim.out, "CSV path; the truth goes next to it as .truth.json")->required();

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "replication study on a named model");
  evaluate->add_option("--model", ev.model, "V1, MP1, M2, HD, M, SA or AR1")->required();
  evaluate->add_option("--rho", ev.rho, "AR(1) coefficient");
  evaluate->add_option("--n", ev.n, "series length (boundaries are rescaled)");
  evaluate->add_option("--reps", ev.reps, "number of replications");
  evaluate->add_option("--seed", ev.seed, "seed; replicate r uses stream r");
  evaluate->add_option("--method-config", ev.method_config, "JSON object or file with params, hd, epsilon, grid_size, confidence");
  evaluate->add_option("--params", ev.params, "parameter list (overrides the model default)");
  evaluate->add_flag("--hd", ev.hd, "high-dimensional mean procedure");
  auto* ev_eps = evaluate->add_option("--epsilon", ev.epsilon, "trimming parameter");
  evaluate->add_option("--grid-size", ev.grid_size, "window size h")->excludes(ev_eps);
  evaluate->add_option("--confidence", ev.confidence, "confidence level");
  evaluate->add_option("--threads", ev.threads, "worker threads per segmentation (0 = all cores)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "snseg: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*segment) return cmd_segment(seg, out);
    if (*critval) return cmd_critval(cv, out, err);
    if (*simulate) return cmd_simulate(sim, out);
    if (*evaluate) return cmd_evaluate(ev, out);
  } catch (const std::exception& e) {
    err << "snseg: error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace snseg::cli
