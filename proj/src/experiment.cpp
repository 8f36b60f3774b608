#include "aoi/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "aoi/analytic.hpp"
#include "aoi/dynamic.hpp"
#include "aoi/fbl.hpp"
#include "aoi/parallel.hpp"
#include "aoi/selector.hpp"
#include "aoi/sim.hpp"
#include "aoi/stats.hpp"
#include "json.hpp"

namespace aoi::experiment {

using nlohmann::json;

namespace {

constexpr Mode kModes[] = {Mode::Analytic,       Mode::Simulate,      Mode::Compare,
                           Mode::AlphaThreshold, Mode::BetaThreshold, Mode::Dynamic};

// ---- JSON helpers -----------------------------------------------------------

void reject_unknown(const json& obj, const std::string& where,
                    std::initializer_list<std::string_view> known) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& item : obj.items()) {
    const auto& key = item.key();
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError(where + "." + key + ": unknown field");
  }
}

double get_number(const json& obj, const std::string& where, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(where + "." + key + ": must be finite");
  return x;
}

std::uint64_t get_unsigned(const json& obj, const std::string& where, const char* key,
                           std::uint64_t fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
    throw ConfigError(where + "." + key + ": expected a non-negative integer");
  return v.get<std::uint64_t>();
}

std::vector<double> get_list(const json& obj, const std::string& where, const char* key) {
  if (!obj.contains(key)) return {};
  const auto& v = obj.at(key);
  if (!v.is_array()) throw ConfigError(where + "." + key + ": expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number())
      throw ConfigError(fmt::format("{}.{}[{}]: expected a number", where, key, i));
    out.push_back(v[i].get<double>());
  }
  return out;
}

DispersionForm parse_dispersion(const json& obj) {
  if (!obj.contains("dispersion_form")) return DispersionForm::AsPrinted;
  const auto& v = obj.at("dispersion_form");
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "as_printed") return DispersionForm::AsPrinted;
    if (s == "squared") return DispersionForm::Squared;
  }
  throw ConfigError("system.dispersion_form: expected \"as_printed\" or \"squared\"");
}

SystemSection parse_system(const json& obj) {
  const std::string w = "system";
  reject_unknown(obj, w,
                 {"n_ues", "gen_rate", "bits", "coding_rate", "snr", "overhead", "alpha",
                  "dispersion_form", "ue_bits", "ue_blocklength", "ue_snr", "broadcast_bits",
                  "broadcast_blocklength"});
  SystemSection s;
  s.n_ues = get_unsigned(obj, w, "n_ues", s.n_ues);
  s.gen_rate = get_number(obj, w, "gen_rate", s.gen_rate);
  s.bits = get_number(obj, w, "bits", s.bits);
  s.coding_rate = get_number(obj, w, "coding_rate", s.coding_rate);
  s.snr = get_number(obj, w, "snr", s.snr);
  s.overhead = get_number(obj, w, "overhead", s.overhead);
  s.alpha = get_number(obj, w, "alpha", s.alpha);
  s.dispersion = parse_dispersion(obj);
  s.ue_bits = get_list(obj, w, "ue_bits");
  s.ue_blocklength = get_list(obj, w, "ue_blocklength");
  s.ue_snr = get_list(obj, w, "ue_snr");
  if (obj.contains("broadcast_bits")) s.broadcast_bits = get_number(obj, w, "broadcast_bits", 0);
  if (obj.contains("broadcast_blocklength"))
    s.broadcast_blocklength = get_number(obj, w, "broadcast_blocklength", 0);

  const bool any_list = !s.ue_bits.empty() || !s.ue_blocklength.empty() || !s.ue_snr.empty();
  if (any_list) {
    if (s.ue_bits.empty() || s.ue_blocklength.empty() || s.ue_snr.empty())
      throw ConfigError("system: ue_bits, ue_blocklength and ue_snr must be given together");
    if (s.ue_bits.size() != s.ue_blocklength.size() || s.ue_bits.size() != s.ue_snr.size())
      throw ConfigError("system: per-UE lists must have equal length");
    if (!s.broadcast_bits || !s.broadcast_blocklength)
      throw ConfigError(
          "system: broadcast_bits and broadcast_blocklength are required with per-UE lists");
  } else if (s.broadcast_bits || s.broadcast_blocklength) {
    throw ConfigError("system: broadcast_bits/broadcast_blocklength need per-UE lists");
  }
  return s;
}

DynamicSection parse_dynamic(const json& obj) {
  const std::string w = "dynamic";
  reject_unknown(obj, w,
                 {"ue_intensity", "inner_radius", "outer_radius", "pathloss_exp", "ref_snr",
                  "outer_snr", "overhead", "common_bits", "individual_bits", "realizations",
                  "rate_backoff"});
  DynamicSection d;
  auto& c = d.cfg;
  c.ue_intensity = get_number(obj, w, "ue_intensity", 0.005);
  c.inner_radius = get_number(obj, w, "inner_radius", 1.0);
  c.outer_radius = get_number(obj, w, "outer_radius", 20.0);
  c.pathloss_exp = get_number(obj, w, "pathloss_exp", 2.2);
  c.overhead = get_number(obj, w, "overhead", 10.0);
  c.common_bits = get_number(obj, w, "common_bits", 1000.0);
  c.individual_bits = get_number(obj, w, "individual_bits", 0.0);
  if (obj.contains("ref_snr") && obj.contains("outer_snr"))
    throw ConfigError("dynamic: give ref_snr or outer_snr, not both");
  if (obj.contains("ref_snr")) {
    c.ref_snr = get_number(obj, w, "ref_snr", 1.0);
  } else {
    c.set_outer_snr(get_number(obj, w, "outer_snr", 10.0));
  }
  d.realizations = get_unsigned(obj, w, "realizations", d.realizations);
  if (obj.contains("rate_backoff")) d.rate_backoff = get_number(obj, w, "rate_backoff", 1.0);
  return d;
}

SimulationSection parse_simulation(const json& obj) {
  const std::string w = "simulation";
  reject_unknown(obj, w, {"horizon", "warmup_fraction", "replications", "threads"});
  SimulationSection s;
  s.horizon = get_number(obj, w, "horizon", s.horizon);
  s.warmup_fraction = get_number(obj, w, "warmup_fraction", s.warmup_fraction);
  s.replications = get_unsigned(obj, w, "replications", s.replications);
  s.threads = get_unsigned(obj, w, "threads", s.threads);
  return s;
}

Sweep parse_sweep(const json& obj) {
  reject_unknown(obj, "sweep", {"parameter", "values"});
  if (!obj.contains("parameter") || !obj.at("parameter").is_string())
    throw ConfigError("sweep.parameter: expected one of R, lambda, N, alpha, beta");
  Sweep s;
  s.parameter = obj.at("parameter").get<std::string>();
  if (!obj.contains("values")) throw ConfigError("sweep.values: missing");
  s.values = get_list(obj, "sweep", "values");
  return s;
}

// ---- grid points --------------------------------------------------------------

struct Point {
  std::optional<double> value;  // swept value, if any
  SystemSection system;
  DynamicSection dynamic;
};

std::vector<Point> expand(const ExperimentSpec& spec) {
  std::vector<Point> points;
  if (!spec.sweep) {
    points.push_back({std::nullopt, spec.system, spec.dynamic});
    return points;
  }
  for (double v : spec.sweep->values) {
    Point p{v, spec.system, spec.dynamic};
    const auto& name = spec.sweep->parameter;
    const bool dyn = spec.mode == Mode::BetaThreshold || spec.mode == Mode::Dynamic;
    if (name == "R") {
      p.system.coding_rate = v;
    } else if (name == "lambda") {
      if (dyn) {
        p.dynamic.cfg.ue_intensity = v;
      } else {
        p.system.gen_rate = v;
      }
    } else if (name == "N") {
      p.system.n_ues = static_cast<std::size_t>(std::llround(v));
    } else if (name == "alpha") {
      p.system.alpha = v;
    } else if (name == "beta") {
      p.dynamic.cfg.individual_bits = v * p.dynamic.cfg.common_bits;
    }
    points.push_back(p);
  }
  return points;
}

std::string num(double x) { return fmt::format("{:.10g}", x); }

std::string param_cell(const Point& p) { return p.value ? num(*p.value) : std::string(); }

std::string sanitize(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  std::replace(s.begin(), s.end(), '"', '\'');
  return s;
}

struct Row {
  std::string text;
  bool error = false;
  bool failed_check = false;
};

void add_flag(std::string& flags, std::string_view f) {
  if (f.empty()) return;
  if (!flags.empty()) flags += '|';
  flags += f;
}

// Mean block error rate over UEs and the short-blocklength warning.
std::pair<double, bool> link_summary(const SystemConfig& cfg, Strategy strategy) {
  double sum = 0.0;
  bool short_block = false;
  for (std::size_t k = 0; k < cfg.n_ues(); ++k) {
    sum += analytic::ue_error_rate(cfg, strategy, k);
    const double m = is_broadcast(strategy) ? cfg.broadcast_blocklength : cfg.ue_blocklength[k];
    short_block = short_block || m < fbl::kTightBlocklength;
  }
  return {sum / static_cast<double>(cfg.n_ues()), short_block};
}

bool finite_row(std::initializer_list<double> xs) {
  return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}

Row strategy_row(const ExperimentSpec& spec, const Point& p, Strategy strategy,
                 std::uint64_t seed) {
  const bool simulate = spec.mode == Mode::Simulate || spec.mode == Mode::Compare;
  std::string flags;
  std::string analytic_cell, sim_cell, ci_cell, eps_cell, pass_cell;
  Row row;
  try {
    const SystemConfig cfg = p.system.build();
    const auto [eps, short_block] = link_summary(cfg, strategy);
    eps_cell = num(eps);
    if (short_block) add_flag(flags, "short_blocklength");
    double analytic_value = std::numeric_limits<double>::quiet_NaN();
    try {
      analytic_value = analytic::system_aoi(cfg, strategy);
      analytic_cell = num(analytic_value);
      if (!std::isfinite(analytic_value)) add_flag(flags, "analytic_nonfinite");
    } catch (const DivergentAoi&) {
      add_flag(flags, "divergent");
    }
    if (simulate) {
      sim::SimRun run;
      run.cfg = cfg;
      run.strategy = strategy;
      run.horizon = spec.simulation.horizon;
      run.warmup_fraction = spec.simulation.warmup_fraction;
      run.replications = spec.simulation.replications;
      run.threads = spec.simulation.threads;
      run.seed = seed;
      const AoiEstimate est = sim::simulate(run);
      sim_cell = num(est.mean);
      ci_cell = num(est.ci_half_width);
      if (!finite_row({est.mean, est.ci_half_width})) add_flag(flags, "simulation_nonfinite");
      if (spec.mode == Mode::Compare) {
        const bool pass = std::isfinite(analytic_value) &&
                          std::abs(analytic_value - est.mean) <= est.ci_half_width;
        pass_cell = pass ? "pass" : "fail";
        row.failed_check = !pass;
      }
    }
  } catch (const std::exception& e) {
    add_flag(flags, "error: " + sanitize(e.what()));
    row.error = true;
    if (spec.mode == Mode::Compare) {
      pass_cell = "fail";
      row.failed_check = true;
    }
  }
  row.text = fmt::format("{},{},{},{},{},{},{}", param_cell(p), to_string(strategy),
                         analytic_cell, sim_cell, ci_cell, eps_cell, flags);
  if (spec.mode == Mode::Compare) row.text += "," + pass_cell;
  return row;
}

std::string_view dominance_name(selector::Dominance d) {
  switch (d) {
    case selector::Dominance::Threshold: return "";
    case selector::Dominance::BroadcastAlways: return "broadcast_always";
    case selector::Dominance::UnicastAlways: return "unicast_always";
  }
  return "";
}

std::string_view dominance_name(selector::BetaDominance d) {
  switch (d) {
    case selector::BetaDominance::Threshold: return "";
    case selector::BetaDominance::BroadcastAlways: return "broadcast_always";
    case selector::BetaDominance::UnicastAlways: return "unicast_always";
    case selector::BetaDominance::Reversed: return "reversed_rule";
  }
  return "";
}

Row alpha_row(const Point& p) {
  Row row;
  std::string flags;
  std::string cells = ",,,,,,";
  try {
    const auto sc = selector::RemoteControlScenario::from_system(p.system.build());
    const auto th = selector::alpha_threshold(sc);
    const auto lim = selector::alpha_threshold_limits(sc);
    add_flag(flags, dominance_name(th.dominance));
    if (th.exceeds_one) add_flag(flags, "exceeds_one");
    if (th.multiple_roots) add_flag(flags, fmt::format("multiple_roots:{}", th.roots.size()));
    if (lim.zero_waiting_exceeds_one) add_flag(flags, "zero_waiting_limit_exceeds_one");
    if (lim.sporadic_exceeds_one) add_flag(flags, "sporadic_limit_exceeds_one");
    cells = fmt::format("{},{},{},{},{},{},{}", sc.n_ues, num(sc.gen_rate), num(sc.tx_ratio),
                        num(th.value), num(th.residual), num(lim.zero_waiting),
                        num(lim.sporadic));
  } catch (const std::exception& e) {
    add_flag(flags, "error: " + sanitize(e.what()));
    row.error = true;
  }
  row.text = fmt::format("{},{},{}", param_cell(p), cells, flags);
  return row;
}

Row beta_row(const Point& p) {
  Row row;
  std::string flags;
  std::string cells = ",,,,,";
  try {
    const auto& c = p.dynamic.cfg;
    const auto th = selector::beta_threshold(c);
    add_flag(flags, dominance_name(th.dominance));
    cells = fmt::format("{},{},{},{},{},{}", num(c.mean_ue_count()), num(c.outer_capacity()),
                        num(fbl::harmonic_capacity(c)), num(th.value),
                        num(selector::beta_threshold_large_population(c)),
                        num(th.denominator));
  } catch (const std::exception& e) {
    add_flag(flags, "error: " + sanitize(e.what()));
    row.error = true;
  }
  row.text = fmt::format("{},{},{}", param_cell(p), cells, flags);
  return row;
}

Row dynamic_row(const Point& p, dynamic::Scheme scheme, std::uint64_t seed, std::size_t threads) {
  Row row;
  std::string flags;
  std::string approx_cell, mc_cell, ci_cell, gap_cell;
  try {
    const auto& c = p.dynamic.cfg;
    const double approx = scheme == dynamic::Scheme::Broadcast
                              ? selector::expected_aoi_broadcast(c)
                              : selector::expected_aoi_unicast(c);
    approx_cell = num(approx);
    dynamic::RealizationOptions opt;
    opt.rate_backoff = p.dynamic.rate_backoff;
    const auto est =
        dynamic::expected_aoi_monte_carlo(c, scheme, p.dynamic.realizations, seed, opt, threads);
    mc_cell = num(est.mean);
    ci_cell = num(est.ci_half_width);
    gap_cell = num((approx - est.mean) / est.mean);
  } catch (const std::exception& e) {
    add_flag(flags, "error: " + sanitize(e.what()));
    row.error = true;
  }
  row.text = fmt::format("{},{},{},{},{},{},{},{}", param_cell(p),
                         scheme == dynamic::Scheme::Broadcast ? "broadcast" : "unicast",
                         num(p.dynamic.cfg.beta()), approx_cell, mc_cell, ci_cell, gap_cell,
                         flags);
  return row;
}

std::string sweep_header(const ExperimentSpec& spec) {
  return spec.sweep ? spec.sweep->parameter : std::string("param");
}

}  // namespace

// ---- public API ---------------------------------------------------------------

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::Analytic: return "analytic";
    case Mode::Simulate: return "simulate";
    case Mode::Compare: return "compare";
    case Mode::AlphaThreshold: return "alpha-threshold";
    case Mode::BetaThreshold: return "beta-threshold";
    case Mode::Dynamic: return "dynamic";
  }
  return "?";
}

Mode parse_mode(std::string_view name) {
  for (Mode m : kModes)
    if (to_string(m) == name) return m;
  throw ConfigError("unknown mode '" + std::string(name) + "'");
}

SystemConfig SystemSection::build() const {
  SystemConfig cfg;
  if (explicit_lists()) {
    cfg.gen_rate = gen_rate;
    cfg.ue_bits = ue_bits;
    cfg.ue_blocklength = ue_blocklength;
    cfg.ue_snr = ue_snr;
    cfg.overhead = overhead;
    cfg.broadcast_bits = broadcast_bits.value_or(0.0);
    cfg.broadcast_blocklength = broadcast_blocklength.value_or(0.0);
  } else {
    cfg = SystemConfig::homogeneous(n_ues, gen_rate, bits, coding_rate, snr, overhead, alpha);
  }
  cfg.dispersion = dispersion;
  cfg.validate();
  return cfg;
}

void ExperimentSpec::validate() const {
  const bool dyn = mode == Mode::BetaThreshold || mode == Mode::Dynamic;
  if (sweep) {
    static const std::set<std::string> system_params{"R", "lambda", "N", "alpha"};
    static const std::set<std::string> dynamic_params{"lambda", "beta"};
    const auto& allowed = dyn ? dynamic_params : system_params;
    if (!allowed.count(sweep->parameter))
      throw ConfigError(fmt::format("sweep.parameter: '{}' cannot be swept in {} mode",
                                    sweep->parameter, to_string(mode)));
    if (!dyn && system.explicit_lists() && sweep->parameter != "lambda")
      throw ConfigError("sweep.parameter: only lambda can be swept with per-UE lists");
    if (sweep->values.empty()) throw ConfigError("sweep.values: must not be empty");
    for (std::size_t i = 1; i < sweep->values.size(); ++i)
      if (!(sweep->values[i] > sweep->values[i - 1]))
        throw ConfigError("sweep.values: must be strictly increasing");
    if (sweep->parameter == "N")
      for (double v : sweep->values)
        if (v < 1 || v != std::floor(v))
          throw ConfigError("sweep.values: N must be a positive integer");
  }
  if (strategies.empty()) throw ConfigError("strategies: must not be empty");
  if (mode == Mode::Simulate || mode == Mode::Compare) {
    if (simulation.replications < 2)
      throw ConfigError("simulation.replications: need at least 2 for a confidence interval");
    if (!(simulation.horizon > 0.0)) throw ConfigError("simulation.horizon: must be positive");
    if (!(simulation.warmup_fraction >= 0.0 && simulation.warmup_fraction < 1.0))
      throw ConfigError("simulation.warmup_fraction: must lie in [0, 1)");
  }
  try {
    for (const auto& p : expand(*this)) {
      if (dyn) {
        p.dynamic.cfg.validate();
        if (mode == Mode::Dynamic && p.dynamic.realizations < 100)
          throw ConfigError("dynamic.realizations: at least 100 are required");
        if (p.dynamic.rate_backoff && !(*p.dynamic.rate_backoff > 0.0 &&
                                        *p.dynamic.rate_backoff <= 1.0))
          throw ConfigError("dynamic.rate_backoff: must lie in (0, 1]");
      } else {
        (void)p.system.build();
      }
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

ExperimentSpec parse_spec(std::string_view json_text, Mode mode) {
  json doc;
  try {
    doc = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }
  reject_unknown(doc, "config", {"system", "strategies", "sweep", "simulation", "dynamic", "seed"});

  ExperimentSpec spec;
  spec.mode = mode;
  if (doc.contains("system")) spec.system = parse_system(doc.at("system"));
  if (doc.contains("dynamic")) spec.dynamic = parse_dynamic(doc.at("dynamic"));
  if (doc.contains("simulation")) spec.simulation = parse_simulation(doc.at("simulation"));
  if (doc.contains("sweep")) spec.sweep = parse_sweep(doc.at("sweep"));
  spec.seed = get_unsigned(doc, "config", "seed", spec.seed);
  if (doc.contains("strategies")) {
    const auto& list = doc.at("strategies");
    if (!list.is_array()) throw ConfigError("strategies: expected an array of names");
    spec.strategies.clear();
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (!list[i].is_string())
        throw ConfigError(fmt::format("strategies[{}]: expected a name", i));
      try {
        spec.strategies.push_back(parse_strategy(list[i].get<std::string>()));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(fmt::format("strategies[{}]: {}", i, e.what()));
      }
    }
  }
  spec.validate();
  return spec;
}

ExperimentSpec load_spec(const std::string& path, Mode mode) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_spec(buf.str(), mode);
}

RunSummary run(const ExperimentSpec& spec, std::ostream& csv) {
  spec.validate();
  const auto points = expand(spec);
  const std::string param = sweep_header(spec);
  std::vector<Row> rows;

  switch (spec.mode) {
    case Mode::Analytic:
    case Mode::Simulate:
    case Mode::Compare: {
      csv << param << ",strategy,analytic_aoi,simulated_aoi,ci_half_width,block_error_rate,flags";
      if (spec.mode == Mode::Compare) csv << ",pass";
      csv << '\n';
      const std::size_t ns = spec.strategies.size();
      rows.resize(points.size() * ns);
      // Simulation parallelizes over replications; analytic rows are cheap.
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::uint64_t seed = stats::stream_seed(spec.seed, i);
        rows[i] = strategy_row(spec, points[i / ns], spec.strategies[i % ns], seed);
      }
      break;
    }
    case Mode::AlphaThreshold: {
      csv << param
          << ",n_ues,gen_rate,tx_ratio,alpha_threshold,residual,zero_waiting_limit,"
             "sporadic_limit,flags\n";
      rows.resize(points.size());
      parallel_for(points.size(), 0, [&](std::size_t i) { rows[i] = alpha_row(points[i]); });
      break;
    }
    case Mode::BetaThreshold: {
      csv << param
          << ",mean_ue_count,outer_capacity,harmonic_capacity,beta_threshold,"
             "beta_threshold_large_population,denominator,flags\n";
      rows.resize(points.size());
      parallel_for(points.size(), 0, [&](std::size_t i) { rows[i] = beta_row(points[i]); });
      break;
    }
    case Mode::Dynamic: {
      csv << param
          << ",scheme,beta,approx_aoi,monte_carlo_aoi,ci_half_width,relative_gap,flags\n";
      rows.resize(points.size() * 2);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto scheme = i % 2 == 0 ? dynamic::Scheme::Broadcast : dynamic::Scheme::Unicast;
        rows[i] = dynamic_row(points[i / 2], scheme, stats::stream_seed(spec.seed, i),
                              spec.simulation.threads);
      }
      break;
    }
  }

  RunSummary summary;
  for (const auto& r : rows) {
    csv << r.text << '\n';
    ++summary.rows;
    if (r.error) ++summary.error_rows;
    if (r.failed_check) ++summary.failed_checks;
  }
  return summary;
}

}  // namespace aoi::experiment
