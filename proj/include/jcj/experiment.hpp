#pragma once

// Monte-Carlo harness: configuration, batch execution, CSV/SVG/manifest output.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "jcj/baseline_ci.hpp"
#include "jcj/channel.hpp"
#include "jcj/errors.hpp"
#include "jcj/jcj.hpp"
#include "jcj/metrics.hpp"
#include "jcj/parallel.hpp"

namespace jcj {

inline constexpr const char* kCsvVersion = "v1";

struct ExperimentConfig {
  ScenarioConfig scenario;
  EtaSweep sweep = EtaSweep::standard();
  int realizations = 200;
  std::uint64_t master_seed = 1;
  std::vector<std::string> schemes{"jcj", "ci"};
  std::string sweep_axis;  // empty: single point
  std::vector<double> sweep_values;
  std::string output_dir = "out";
  unsigned threads = 0;
  ThresholdSense sense = ThresholdSense::Equality;
  bool reduced = true;
  ErrorScale error_scale = ErrorScale::Relative;
  bool relaxation_candidate = true;
  double tie_tolerance = 1e-6;
  SolverOptions solver;

  bool runs(const std::string& scheme) const {
    return std::find(schemes.begin(), schemes.end(), scheme) != schemes.end();
  }

  JcjOptions jcj_options() const {
    JcjOptions o;
    o.solver = solver;
    o.problem.reduced = reduced;
    o.problem.sense = sense;
    o.error_scale = error_scale;
    o.relaxation_candidate = relaxation_candidate;
    o.tie_tolerance = tie_tolerance;
    o.threads = 1;
    return o;
  }

  void validate() const {
    if (realizations < 1) throw ConfigError("realizations", "must be >= 1");
    if (!sweep_axis.empty() && sweep_values.empty()) throw ConfigError("sweep_values", "must be nonempty");
    if (schemes.empty()) throw ConfigError("schemes", "must name at least one scheme");
    for (const auto& s : schemes) {
      if (s != "jcj" && s != "ci") throw ConfigError("schemes", "unknown scheme '" + s + "'");
    }
    try {
      sweep.validate();
    } catch (const DomainError& e) {
      throw ConfigError("phi", e.what());
    }
    const auto& sc = scenario;
    if (sc.n_tx < 1) throw ConfigError("n_tx", "must be >= 1");
    if (sc.n_ue < 0) throw ConfigError("n_ue", "must be >= 0");
    if (sc.n_uav < 0) throw ConfigError("n_uav", "must be >= 0");
    if (!(sc.carrier_freq_hz > 0.0)) throw ConfigError("carrier_freq_hz", "must be > 0");
    if (!(sc.bandwidth_hz > 0.0)) throw ConfigError("bandwidth_hz", "must be > 0");
    if (!(sc.range_min_m > 0.0 && sc.range_max_m >= sc.range_min_m)) {
      throw ConfigError("range_min_m", "need 0 < range_min_m <= range_max_m");
    }
    if (!(sc.aod_min_deg >= -90.0 && sc.aod_max_deg <= 90.0 && sc.aod_min_deg <= sc.aod_max_deg)) {
      throw ConfigError("aod_min_deg", "need -90 <= aod_min_deg <= aod_max_deg <= 90");
    }
    if (sc.r_th < 0.0) throw ConfigError("r_th", "must be >= 0");
    if (!(solver.feas_tol > 0.0)) throw ConfigError("feas_tol", "must be > 0");
    if (!(solver.gap_tol > 0.0)) throw ConfigError("gap_tol", "must be > 0");
    if (solver.max_iter < 1) throw ConfigError("max_iter", "must be >= 1");
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::string unquote(const std::string& s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

inline double parse_double(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  double out = 0.0;
  const auto r = std::from_chars(t.data(), t.data() + t.size(), out);
  if (r.ec != std::errc() || r.ptr != t.data() + t.size() || !std::isfinite(out)) {
    throw ConfigError(key, "expected a number, got '" + v + "'");
  }
  return out;
}

inline long long parse_int(const std::string& key, const std::string& v) {
  const double d = parse_double(key, v);
  if (d != std::floor(d) || std::abs(d) > 9e15) throw ConfigError(key, "expected an integer, got '" + v + "'");
  return static_cast<long long>(d);
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw ConfigError(key, "expected true/false, got '" + v + "'");
}

inline std::vector<std::string> parse_list(const std::string& v) {
  std::string t = trim(v);
  if (!t.empty() && t.front() == '[') {
    if (t.back() != ']') throw ConfigError("", "unterminated list '" + v + "'");
    t = t.substr(1, t.size() - 2);
  }
  std::vector<std::string> out;
  std::stringstream ss(t);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = unquote(trim(item));
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline std::vector<double> parse_double_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& s : parse_list(v)) out.push_back(parse_double(key, s));
  return out;
}

inline std::string fmt_double(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

inline std::string fmt_list(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt_double(v[i]);
  return s + "]";
}

/// Numeric scenario fields addressable by name (config keys and sweep axes).
inline double* scenario_field(ScenarioConfig& c, const std::string& key) {
  static const std::map<std::string, double ScenarioConfig::*> fields{
      {"carrier_freq_hz", &ScenarioConfig::carrier_freq_hz},
      {"bandwidth_hz", &ScenarioConfig::bandwidth_hz},
      {"noise_psd_dbm_hz", &ScenarioConfig::noise_psd_dbm_hz},
      {"eaves_power_dbm", &ScenarioConfig::eaves_power_dbm},
      {"r_th", &ScenarioConfig::r_th},
      {"gamma_th_db", &ScenarioConfig::gamma_th_db},
      {"range_min_m", &ScenarioConfig::range_min_m},
      {"range_max_m", &ScenarioConfig::range_max_m},
      {"aod_min_deg", &ScenarioConfig::aod_min_deg},
      {"aod_max_deg", &ScenarioConfig::aod_max_deg},
      {"min_ue_separation_deg", &ScenarioConfig::min_ue_separation_deg},
      {"min_ue_uav_separation_deg", &ScenarioConfig::min_ue_uav_separation_deg},
      {"tx_gain", &ScenarioConfig::tx_gain},
      {"rx_gain", &ScenarioConfig::rx_gain},
  };
  const auto it = fields.find(key);
  return it == fields.end() ? nullptr : &(c.*(it->second));
}

inline int* scenario_int_field(ScenarioConfig& c, const std::string& key) {
  if (key == "n_ue") return &c.n_ue;
  if (key == "n_uav") return &c.n_uav;
  if (key == "n_tx") return &c.n_tx;
  if (key == "max_sampling_attempts") return &c.max_sampling_attempts;
  return nullptr;
}

}  // namespace detail

/// True when `axis` names a numeric scenario field usable as a sweep axis.
inline bool is_sweep_axis(const std::string& axis) {
  ScenarioConfig c;
  return detail::scenario_field(c, axis) || detail::scenario_int_field(c, axis) ||
         axis == "noise_power_dbm";
}

/// Applies `value` to the scenario field `axis` (integers are checked).
inline void apply_axis(ScenarioConfig& c, const std::string& axis, double value) {
  if (double* d = detail::scenario_field(c, axis)) {
    *d = value;
  } else if (int* i = detail::scenario_int_field(c, axis)) {
    if (value != std::floor(value)) throw ConfigError(axis, "integer field given a fractional value");
    *i = static_cast<int>(value);
  } else if (axis == "noise_power_dbm") {
    c.noise_power_dbm = value;
  } else {
    throw ConfigError(axis, "not a numeric scenario field");
  }
}

/// Sets one key.  Unknown keys are rejected.
inline void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& raw) {
  using namespace detail;
  const std::string v = unquote(trim(raw));
  if (double* d = scenario_field(cfg.scenario, key)) {
    *d = parse_double(key, v);
  } else if (int* i = scenario_int_field(cfg.scenario, key)) {
    *i = static_cast<int>(parse_int(key, v));
  } else if (key == "noise_power_dbm") {
    if (v == "auto") {
      cfg.scenario.noise_power_dbm.reset();
    } else {
      cfg.scenario.noise_power_dbm = parse_double(key, v);
    }
  } else if (key == "phi") {
    cfg.sweep.phi = parse_double_list(key, v);
  } else if (key == "realizations") {
    cfg.realizations = static_cast<int>(parse_int(key, v));
  } else if (key == "master_seed" || key == "seed") {
    const long long s = parse_int(key, v);
    if (s < 0) throw ConfigError(key, "must be >= 0");
    cfg.master_seed = static_cast<std::uint64_t>(s);
  } else if (key == "schemes") {
    cfg.schemes = parse_list(v);
  } else if (key == "sweep_axis") {
    if (!v.empty() && !is_sweep_axis(v)) throw ConfigError(key, "'" + v + "' is not a numeric scenario field");
    cfg.sweep_axis = v;
  } else if (key == "sweep_values") {
    cfg.sweep_values = parse_double_list(key, v);
  } else if (key == "output_dir") {
    cfg.output_dir = v;
  } else if (key == "threads") {
    const long long t = parse_int(key, v);
    if (t < 0) throw ConfigError(key, "must be >= 0");
    cfg.threads = static_cast<unsigned>(t);
  } else if (key == "constraint_sense") {
    if (v == "equality") {
      cfg.sense = ThresholdSense::Equality;
    } else if (v == "inequality") {
      cfg.sense = ThresholdSense::Inequality;
    } else {
      throw ConfigError(key, "expected equality or inequality");
    }
  } else if (key == "reduced") {
    cfg.reduced = parse_bool(key, v);
  } else if (key == "error_scale") {
    if (v == "relative") {
      cfg.error_scale = ErrorScale::Relative;
    } else if (v == "absolute") {
      cfg.error_scale = ErrorScale::Absolute;
    } else {
      throw ConfigError(key, "expected relative or absolute");
    }
  } else if (key == "relaxation_candidate") {
    cfg.relaxation_candidate = parse_bool(key, v);
  } else if (key == "tie_tolerance") {
    cfg.tie_tolerance = parse_double(key, v);
    if (cfg.tie_tolerance < 0.0) throw ConfigError(key, "must be >= 0");
  } else if (key == "feas_tol") {
    cfg.solver.feas_tol = parse_double(key, v);
  } else if (key == "gap_tol") {
    cfg.solver.gap_tol = parse_double(key, v);
  } else if (key == "max_iter") {
    cfg.solver.max_iter = static_cast<int>(parse_int(key, v));
  } else {
    throw ConfigError(key, "unknown configuration key");
  }
}

/// Parses `key = value` lines.  '#' starts a comment; `[section]` headers are
/// accepted and ignored (keys are global).
inline void apply_config_text(ExperimentConfig& cfg, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    // Strip comments outside quotes.
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line.resize(i);
        break;
      }
    }
    line = detail::trim(line);
    if (line.empty() || line.front() == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("", "line " + std::to_string(lineno) + ": expected key = value");
    }
    set_config_value(cfg, detail::trim(line.substr(0, eq)), line.substr(eq + 1));
  }
}

inline ExperimentConfig load_config_file(const std::string& path, ExperimentConfig base = {}) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config", "cannot read '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  apply_config_text(base, ss.str());
  return base;
}

/// Canonical text form; also the input of the manifest hash.
inline std::string config_to_text(const ExperimentConfig& c) {
  using detail::fmt_double;
  const auto& s = c.scenario;
  std::ostringstream o;
  o << "carrier_freq_hz = " << fmt_double(s.carrier_freq_hz) << "\n"
    << "bandwidth_hz = " << fmt_double(s.bandwidth_hz) << "\n"
    << "noise_psd_dbm_hz = " << fmt_double(s.noise_psd_dbm_hz) << "\n"
    << "noise_power_dbm = " << (s.noise_power_dbm ? fmt_double(*s.noise_power_dbm) : "auto") << "\n"
    << "eaves_power_dbm = " << fmt_double(s.eaves_power_dbm) << "\n"
    << "n_ue = " << s.n_ue << "\n"
    << "n_uav = " << s.n_uav << "\n"
    << "n_tx = " << s.n_tx << "\n"
    << "r_th = " << fmt_double(s.r_th) << "\n"
    << "gamma_th_db = " << fmt_double(s.gamma_th_db) << "\n"
    << "range_min_m = " << fmt_double(s.range_min_m) << "\n"
    << "range_max_m = " << fmt_double(s.range_max_m) << "\n"
    << "aod_min_deg = " << fmt_double(s.aod_min_deg) << "\n"
    << "aod_max_deg = " << fmt_double(s.aod_max_deg) << "\n"
    << "min_ue_separation_deg = " << fmt_double(s.min_ue_separation_deg) << "\n"
    << "min_ue_uav_separation_deg = " << fmt_double(s.min_ue_uav_separation_deg) << "\n"
    << "tx_gain = " << fmt_double(s.tx_gain) << "\n"
    << "rx_gain = " << fmt_double(s.rx_gain) << "\n"
    << "max_sampling_attempts = " << s.max_sampling_attempts << "\n"
    << "phi = " << detail::fmt_list(c.sweep.phi) << "\n"
    << "realizations = " << c.realizations << "\n"
    << "master_seed = " << c.master_seed << "\n"
    << "schemes = [";
  for (std::size_t i = 0; i < c.schemes.size(); ++i) o << (i ? ", " : "") << '"' << c.schemes[i] << '"';
  o << "]\n"
    << "sweep_axis = \"" << c.sweep_axis << "\"\n"
    << "sweep_values = " << detail::fmt_list(c.sweep_values) << "\n"
    << "constraint_sense = \"" << (c.sense == ThresholdSense::Equality ? "equality" : "inequality") << "\"\n"
    << "reduced = " << (c.reduced ? "true" : "false") << "\n"
    << "error_scale = \"" << (c.error_scale == ErrorScale::Relative ? "relative" : "absolute") << "\"\n"
    << "relaxation_candidate = " << (c.relaxation_candidate ? "true" : "false") << "\n"
    << "tie_tolerance = " << fmt_double(c.tie_tolerance) << "\n"
    << "feas_tol = " << fmt_double(c.solver.feas_tol) << "\n"
    << "gap_tol = " << fmt_double(c.solver.gap_tol) << "\n"
    << "max_iter = " << c.solver.max_iter << "\n";
  return o.str();
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Hash over the fields that determine results (output location and worker
/// count excluded).
inline std::uint64_t config_hash(const ExperimentConfig& c) { return fnv1a64(config_to_text(c)); }

struct ResultRow {
  double sweep_value = 0.0;
  int realization = 0;
  std::uint64_t seed = 0;
  std::string jcj_status = "not_run";
  std::string ci_status = "not_run";
  std::string sdr_status = "not_run";
  std::optional<double> chosen_eta;
  std::optional<double> jcj_error;
  std::optional<double> rank1_ratio;
  RealizationResult metrics;
  std::string message;
  ComplexMatrix jcj_f;  // kept in memory for spot checks
  ComplexMatrix ci_f;
};

struct ResultTable {
  std::string sweep_axis;
  std::vector<ResultRow> rows;
};

/// Seed of realization `index`; shared across sweep values so every point of a
/// sweep sees the same random draws.
inline std::uint64_t realization_seed(std::uint64_t master_seed, int index) {
  return CounterRng::for_stream(master_seed, static_cast<std::uint64_t>(index))();
}

inline std::string status_of(const std::exception& e) {
  if (dynamic_cast<const AllEtaInfeasible*>(&e)) return "all_eta_infeasible";
  if (dynamic_cast<const InfeasibleProblem*>(&e)) return "infeasible";
  if (dynamic_cast<const DimensionExceeded*>(&e)) return "dimension_exceeded";
  if (dynamic_cast<const RankDeficient*>(&e)) return "rank_deficient";
  if (dynamic_cast<const SolverError*>(&e)) return "solver_failure";
  return "error";
}

/// Runs every requested scheme on one scenario.
inline ResultRow run_realization(const ExperimentConfig& cfg, const ScenarioConfig& sc, int index) {
  ResultRow row;
  row.realization = index;
  row.seed = realization_seed(cfg.master_seed, index);
  Scenario s;
  try {
    s = sample_scenario(sc, row.seed);
  } catch (const std::exception& e) {
    row.jcj_status = row.ci_status = "sampling_failed";
    row.message = e.what();
    return row;
  }
  const JcjOptions jo = cfg.jcj_options();
  const ComplexMatrix* jf = nullptr;
  const ComplexMatrix* cf = nullptr;
  std::optional<double> sdr;
  auto note = [&](const std::string& m) {
    if (!m.empty()) row.message += (row.message.empty() ? "" : "; ") + m;
  };
  if (cfg.runs("jcj")) {
    try {
      const Beamformer b = run_jcj(s, cfg.sweep, jo);
      row.jcj_f = b.f;
      jf = &row.jcj_f;
      row.jcj_status = "ok";
      row.chosen_eta = b.chosen_eta;
      row.jcj_error = b.error;
      row.rank1_ratio = b.rank1_ratio;
      sdr = b.relaxation_power_mw;
      for (const auto& w : b.warnings) note(w);
    } catch (const std::exception& e) {
      row.jcj_status = status_of(e);
      note(e.what());
    }
    if (sdr) {
      row.sdr_status = "ok";
    } else {
      try {
        sdr = lower_bound_power(s, jo);
        row.sdr_status = "ok";
      } catch (const std::exception& e) {
        row.sdr_status = status_of(e);
        note(e.what());
      }
    }
  }
  if (cfg.runs("ci")) {
    try {
      const CiBeamformer c = run_ci(s);
      row.ci_f = c.f;
      cf = &row.ci_f;
      row.ci_status = "ok";
    } catch (const std::exception& e) {
      row.ci_status = status_of(e);
      note(e.what());
    }
  }
  row.metrics = realization_metrics(s, jf, cf, sdr);
  return row;
}

inline ResultTable run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::vector<double> points =
      cfg.sweep_axis.empty() ? std::vector<double>{0.0} : cfg.sweep_values;
  std::vector<ScenarioConfig> scen(points.size(), cfg.scenario);
  if (!cfg.sweep_axis.empty()) {
    for (std::size_t i = 0; i < points.size(); ++i) apply_axis(scen[i], cfg.sweep_axis, points[i]);
  }
  ResultTable t;
  t.sweep_axis = cfg.sweep_axis;
  const std::size_t r = static_cast<std::size_t>(cfg.realizations);
  t.rows.resize(points.size() * r);
  parallel_for(t.rows.size(), cfg.threads, [&](std::size_t k) {
    const std::size_t p = k / r;
    ResultRow row = run_realization(cfg, scen[p], static_cast<int>(k % r));
    row.sweep_value = points[p];
    t.rows[k] = std::move(row);
  });
  return t;
}

/// True when no row produced any successful beamformer.
inline bool all_failed(const ResultTable& t) {
  return std::none_of(t.rows.begin(), t.rows.end(), [](const ResultRow& r) {
    return r.jcj_status == "ok" || r.ci_status == "ok";
  });
}

namespace detail {

inline std::string opt_str(const std::optional<double>& v) { return v ? fmt_double(*v) : ""; }

inline std::optional<double> to_db(const std::optional<double>& v) {
  if (!v || !(*v > 0.0)) return std::nullopt;
  return 10.0 * std::log10(*v);
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string o = "\"";
  for (char c : s) {
    if (c == '"') o += '"';
    o += (c == '\n' ? ' ' : c);
  }
  return o + "\"";
}

}  // namespace detail

/// ci_power_db - jcj_power_db.
inline std::optional<double> power_gain_db(const RealizationResult& m) {
  const auto a = detail::to_db(m.ci_power_mw);
  const auto b = detail::to_db(m.jcj_power_mw);
  if (!a || !b) return std::nullopt;
  return *a - *b;
}

inline void write_results_csv(std::ostream& o, const ResultTable& t) {
  using detail::opt_str;
  using detail::to_db;
  o << "# jcj-results " << kCsvVersion << "\n";
  o << "sweep_axis,sweep_value,realization,seed,jcj_status,ci_status,sdr_status,chosen_eta,"
       "jcj_error,rank1_ratio,jcj_power_mw,jcj_power_dbm,ci_power_mw,ci_power_dbm,sdr_power_mw,"
       "sdr_power_dbm,power_error_mw,power_error_dbm,normalized_power_error,"
       "normalized_power_error_db,rate_error,sinr_error_db,ci_rate_error,ci_sinr_error_db,"
       "power_gain_db,message\n";
  for (const auto& r : t.rows) {
    const auto& m = r.metrics;
    o << detail::csv_escape(t.sweep_axis) << ',' << detail::fmt_double(r.sweep_value) << ','
      << r.realization << ',' << r.seed << ',' << r.jcj_status << ',' << r.ci_status << ','
      << r.sdr_status << ',' << (r.chosen_eta ? detail::fmt_double(*r.chosen_eta) : (r.jcj_status == "ok" ? "none" : ""))
      << ',' << opt_str(r.jcj_error) << ',' << opt_str(r.rank1_ratio) << ','
      << opt_str(m.jcj_power_mw) << ',' << opt_str(to_db(m.jcj_power_mw)) << ','
      << opt_str(m.ci_power_mw) << ',' << opt_str(to_db(m.ci_power_mw)) << ','
      << opt_str(m.sdr_power_mw) << ',' << opt_str(to_db(m.sdr_power_mw)) << ','
      << opt_str(m.power_error_mw) << ',' << opt_str(to_db(m.power_error_mw)) << ','
      << opt_str(m.normalized_power_error) << ',' << opt_str(to_db(m.normalized_power_error)) << ','
      << opt_str(m.rate_error) << ',' << opt_str(m.sinr_error) << ',' << opt_str(m.ci_rate_error)
      << ',' << opt_str(m.ci_sinr_error) << ',' << opt_str(power_gain_db(m)) << ','
      << detail::csv_escape(r.message) << "\n";
  }
}

/// Metric series plotted as CDFs.  Power quantities are in dB (dBm for absolute powers).
struct MetricDef {
  std::string name;
  std::string label;
  std::function<std::optional<double>(const ResultRow&)> get;
};

inline std::vector<MetricDef> cdf_metrics() {
  using detail::to_db;
  return {
      {"power_error", "power error (dBm)", [](const ResultRow& r) { return to_db(r.metrics.power_error_mw); }},
      {"normalized_power_error", "normalized power error (dB)",
       [](const ResultRow& r) { return to_db(r.metrics.normalized_power_error); }},
      {"rate_error", "rate error (bit/(s Hz))", [](const ResultRow& r) { return r.metrics.rate_error; }},
      {"sinr_error", "SINR error (dB)", [](const ResultRow& r) { return r.metrics.sinr_error; }},
      {"power_gain", "CI power - JCJ power (dB)", [](const ResultRow& r) { return power_gain_db(r.metrics); }},
  };
}

/// Values of `metric` for one sweep point, rows in table order.
inline std::vector<double> metric_values(const ResultTable& t, const MetricDef& metric, double point) {
  std::vector<double> v;
  for (const auto& r : t.rows) {
    if (r.sweep_value != point) continue;
    const auto x = metric.get(r);
    if (x && std::isfinite(*x)) v.push_back(*x);
  }
  return v;
}

inline void write_cdf_csv(std::ostream& o, const CdfSeries& c) {
  o << "value,probability\n";
  for (std::size_t i = 0; i < c.values.size(); ++i) {
    o << detail::fmt_double(c.values[i]) << ',' << detail::fmt_double(c.probabilities[i]) << "\n";
  }
}

/// Step-curve CDF plot, one curve per series.
inline void write_cdf_svg(std::ostream& o, const std::string& xlabel,
                          const std::vector<std::pair<std::string, CdfSeries>>& series) {
  const double w = 640, h = 440, ml = 70, mr = 20, mt = 20, mb = 60;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& [name, c] : series) {
    lo = std::min(lo, c.values.front());
    hi = std::max(hi, c.values.back());
  }
  if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
  if (hi - lo < 1e-300) lo -= 0.5, hi += 0.5;
  const double pad = 0.02 * (hi - lo);
  lo -= pad;
  hi += pad;
  auto px = [&](double x) { return ml + (x - lo) / (hi - lo) * (w - ml - mr); };
  auto py = [&](double p) { return h - mb - p * (h - mt - mb); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  char buf[256];
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"%.0f\" height=\"%.0f\" font-family=\"sans-serif\" font-size=\"12\">\n",
                w, h);
  o << buf << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf, "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" fill=\"none\" stroke=\"black\"/>\n",
                ml, mt, w - ml - mr, h - mt - mb);
  o << buf;
  for (int i = 0; i <= 5; ++i) {
    const double p = i / 5.0;
    const double x = lo + p * (hi - lo);
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"#ddd\"/>"
                  "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\">%.1f</text>"
                  "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">%.3g</text>\n",
                  ml, py(p), w - mr, py(p), ml - 6, py(p) + 4, p, px(x), h - mb + 18, x);
    o << buf;
  }
  std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">", (ml + w - mr) / 2, h - 15);
  o << buf << xlabel << "</text>\n";
  std::snprintf(buf, sizeof buf, "<text x=\"15\" y=\"%.1f\" text-anchor=\"middle\" transform=\"rotate(-90 15 %.1f)\">CDF</text>\n",
                (mt + h - mb) / 2, (mt + h - mb) / 2);
  o << buf;
  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto& c = series[s].second;
    const char* col = colors[s % 8];
    o << "<path fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" d=\"";
    std::snprintf(buf, sizeof buf, "M%.2f,%.2f", px(c.values.front()), py(0.0));
    o << buf;
    double prev = 0.0;
    for (std::size_t i = 0; i < c.values.size(); ++i) {
      std::snprintf(buf, sizeof buf, " L%.2f,%.2f L%.2f,%.2f", px(c.values[i]), py(prev), px(c.values[i]),
                    py(c.probabilities[i]));
      o << buf;
      prev = c.probabilities[i];
    }
    o << "\"/>\n";
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"%s\" stroke-width=\"2\"/>"
                  "<text x=\"%.1f\" y=\"%.1f\">",
                  ml + 10, mt + 15 + 16.0 * s, ml + 30, mt + 15 + 16.0 * s, col, ml + 35, mt + 19 + 16.0 * s);
    o << buf << series[s].first << "</text>\n";
  }
  o << "</svg>\n";
}

struct OutputFiles {
  std::vector<std::string> paths;
};

/// Writes results.csv, cdf_<metric>[_<axis>_<value>].csv, cdf_<metric>.svg and manifest.txt.
inline OutputFiles emit_outputs(const ResultTable& t, const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  if (t.rows.empty()) throw DomainError("emit_outputs: empty result table");
  const fs::path dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw Error("emit_outputs: cannot create output directory '" + dir.string() + "'");
  }
  OutputFiles out;
  auto open = [&](const fs::path& p) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error("emit_outputs: cannot write '" + p.string() + "'");
    out.paths.push_back(p.string());
    return f;
  };
  {
    auto f = open(dir / "results.csv");
    write_results_csv(f, t);
    if (!f) throw Error("emit_outputs: write failed for results.csv");
  }
  std::vector<double> points;
  for (const auto& r : t.rows) {
    if (std::find(points.begin(), points.end(), r.sweep_value) == points.end()) points.push_back(r.sweep_value);
  }
  for (const auto& m : cdf_metrics()) {
    std::vector<std::pair<std::string, CdfSeries>> series;
    for (double p : points) {
      const auto vals = metric_values(t, m, p);
      if (vals.empty()) continue;
      const CdfSeries c = empirical_cdf(vals);
      const std::string tag = t.sweep_axis.empty() ? "" : "_" + t.sweep_axis + "_" + detail::fmt_double(p);
      auto f = open(dir / ("cdf_" + m.name + tag + ".csv"));
      write_cdf_csv(f, c);
      series.emplace_back(t.sweep_axis.empty() ? m.name : t.sweep_axis + " = " + detail::fmt_double(p), c);
    }
    if (series.empty()) continue;
    auto f = open(dir / ("cdf_" + m.name + ".svg"));
    write_cdf_svg(f, m.label, series);
  }
  {
    auto f = open(dir / "manifest.txt");
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash(cfg)));
    long ok_jcj = 0, ok_ci = 0;
    for (const auto& r : t.rows) {
      ok_jcj += r.jcj_status == "ok";
      ok_ci += r.ci_status == "ok";
    }
    f << "csv_version = " << kCsvVersion << "\n"
      << "config_hash = " << hash << "\n"
      << "master_seed = " << cfg.master_seed << "\n"
      << "realizations = " << cfg.realizations << "\n"
      << "rows = " << t.rows.size() << "\n"
      << "sweep_axis = " << t.sweep_axis << "\n"
      << "sweep_values = " << detail::fmt_list(cfg.sweep_values) << "\n"
      << "jcj_ok = " << ok_jcj << "\n"
      << "ci_ok = " << ok_ci << "\n"
      << "files = " << out.paths.size() << "\n";
    f << "\n# resolved configuration\n";
    std::istringstream cfgtext(config_to_text(cfg));
    std::string line;
    while (std::getline(cfgtext, line)) f << "config." << line << "\n";
  }
  return out;
}

}  // namespace jcj
