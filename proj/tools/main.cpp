// jcj: command-line front end for the beamforming experiments.
//
//   jcj run    --config cfg.toml --out results/ [--sweep n_tx=8,16] ...
//   jcj solve  --seed 3            one scenario, beamformer and diagnostics
//   jcj check                      structural property suites
//   jcj oracle --instances 50      relaxation / brute force / JCJ comparison
//
// Settings are resolved as: built-in defaults, then --config file, then --set
// key=value (in order), then the dedicated flags (--seed, --realizations,
// --scheme, --sweep, --out, --threads).
//
// Exit codes: 0 success, 1 configuration error, 2 runtime failure,
// 3 every realization failed (or the single solve was infeasible).

#include <chrono>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "jcj/baseline_ci.hpp"
#include "jcj/experiment.hpp"
#include "jcj/jcj.hpp"
#include "jcj/metrics.hpp"
#include "jcj/oracle.hpp"
#include "jcj/properties.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitInfeasible = 3;

struct CommonFlags {
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  bool verbose = false;
};

struct RunFlags {
  std::optional<std::string> out;
  std::optional<int> realizations;
  std::vector<std::string> schemes;
  std::string sweep;
};

void add_common(CLI::App* app, CommonFlags& f) {
  app->add_option("--config", f.config, "key = value configuration file");
  app->add_option("--set", f.sets, "override one key (key=value), repeatable");
  app->add_option("--seed", f.seed, "master seed");
  app->add_option("--threads", f.threads, "worker threads (0 = all cores)");
  app->add_flag("--verbose,-v", f.verbose, "print solver progress");
}

jcj::ExperimentConfig resolve(const CommonFlags& f, const RunFlags* r = nullptr) {
  jcj::ExperimentConfig cfg;
  if (!f.config.empty()) cfg = jcj::load_config_file(f.config, cfg);
  for (const auto& kv : f.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw jcj::ConfigError(kv, "--set expects key=value");
    jcj::set_config_value(cfg, jcj::detail::trim(kv.substr(0, eq)), kv.substr(eq + 1));
  }
  if (f.seed) cfg.master_seed = *f.seed;
  if (f.threads) cfg.threads = *f.threads;
  if (r) {
    if (r->out) cfg.output_dir = *r->out;
    if (r->realizations) cfg.realizations = *r->realizations;
    if (!r->schemes.empty()) {
      cfg.schemes.clear();
      for (const auto& s : r->schemes) {
        for (const auto& x : jcj::detail::parse_list(s)) cfg.schemes.push_back(x);
      }
    }
    if (!r->sweep.empty()) {
      const auto eq = r->sweep.find('=');
      if (eq == std::string::npos) throw jcj::ConfigError("sweep", "--sweep expects axis=v1,v2,...");
      jcj::set_config_value(cfg, "sweep_axis", r->sweep.substr(0, eq));
      jcj::set_config_value(cfg, "sweep_values", r->sweep.substr(eq + 1));
    }
  }
  if (f.verbose) {
    cfg.solver.verbose = true;
  }
  cfg.validate();
  return cfg;
}

std::string fmt(double x, const char* spec = "%.6g") {
  char b[64];
  std::snprintf(b, sizeof b, spec, x);
  return b;
}

int cmd_run(const jcj::ExperimentConfig& cfg, bool verbose) {
  const auto t0 = std::chrono::steady_clock::now();
  jcj::ExperimentConfig quiet = cfg;
  quiet.solver.verbose = false;  // per-iteration logs from parallel workers would interleave
  const jcj::ResultTable t = jcj::run_experiment(quiet);
  const auto files = jcj::emit_outputs(t, cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  long jok = 0, cok = 0;
  for (const auto& r : t.rows) {
    jok += r.jcj_status == "ok";
    cok += r.ci_status == "ok";
    if (verbose) {
      std::cerr << "row " << r.realization << " @" << r.sweep_value << ": jcj=" << r.jcj_status
                << " ci=" << r.ci_status << (r.message.empty() ? "" : " (" + r.message + ")") << "\n";
    }
  }
  std::cout << "rows " << t.rows.size() << ", jcj ok " << jok << ", ci ok " << cok << ", "
            << fmt(secs, "%.1f") << " s\n";
  for (const auto& p : files.paths) std::cout << "  " << p << "\n";
  return jcj::all_failed(t) ? kExitInfeasible : kExitOk;
}

void print_matrix(const jcj::ComplexMatrix& f) {
  for (jcj::Index r = 0; r < f.rows(); ++r) {
    std::cout << "  ";
    for (jcj::Index c = 0; c < f.cols(); ++c) {
      std::printf("%+.4e%+.4ej  ", f(r, c).real(), f(r, c).imag());
    }
    std::cout << "\n";
  }
  std::cout.flush();
}

void print_links(const jcj::Scenario& s, const jcj::ComplexMatrix& f) {
  const jcj::LinkReport l = jcj::evaluate_links(s, f);
  for (int n = 0; n < s.n_ue(); ++n) {
    std::cout << "  UE " << n << ": rate " << fmt(l.rates[n], "%.9f") << " (target " << s.r_th[n] << ")\n";
  }
  const auto active = jcj::active_uavs(s);
  for (int m = 0; m < s.n_uav(); ++m) {
    std::cout << "  UAV " << m << ": SINR " << fmt(l.sinrs_db[m], "%.6f") << " dB (target "
              << s.gamma_th_db[m] << (active[m] ? "" : ", inactive") << ")\n";
  }
}

int cmd_solve(const jcj::ExperimentConfig& cfg, int realization) {
  const std::uint64_t seed = jcj::realization_seed(cfg.master_seed, realization);
  const jcj::Scenario s = jcj::sample_scenario(cfg.scenario, seed);
  std::cout << "scenario seed " << seed << ": n_tx " << s.n_tx() << ", n_ue " << s.n_ue() << ", n_uav "
            << s.n_uav() << "\n";
  for (int n = 0; n < s.n_ue(); ++n) {
    std::cout << "  UE " << n << ": " << fmt(s.ues[n].range_m, "%.2f") << " m, "
              << fmt(s.ues[n].aod_deg, "%.2f") << " deg\n";
  }
  for (int m = 0; m < s.n_uav(); ++m) {
    std::cout << "  UAV " << m << ": " << fmt(s.uavs[m].range_m, "%.2f") << " m, "
              << fmt(s.uavs[m].aod_deg, "%.2f") << " deg\n";
  }
  int code = kExitOk;
  jcj::JcjOptions jo = cfg.jcj_options();
  if (cfg.solver.verbose) jo.solver.log = &std::cerr;
  if (cfg.runs("jcj")) {
    try {
      const jcj::Beamformer b = jcj::run_jcj(s, cfg.sweep, jo);
      std::cout << "\nJCJ: power " << fmt(b.power_mw) << " mW (" << fmt(jcj::mw_to_dbm(b.power_mw), "%.3f")
                << " dBm), eta " << (b.chosen_eta ? fmt(*b.chosen_eta) : "none") << ", error "
                << fmt(b.error, "%.3e") << ", rank-1 ratio " << fmt(b.rank1_ratio, "%.9f") << "\n";
      if (b.relaxation_power_mw) std::cout << "relaxation bound " << fmt(*b.relaxation_power_mw) << " mW\n";
      std::cout << "sweep:\n";
      for (const auto& a : b.per_eta_errors) {
        std::cout << "  eta " << (a.eta ? fmt(*a.eta) : "none") << ": " << jcj::to_string(a.status)
                  << ", " << a.iterations << " it, trace " << fmt(a.sdp_power_mw) << ", error "
                  << fmt(a.error, "%.3e") << "\n";
      }
      for (const auto& w : b.warnings) std::cout << "warning: " << w << "\n";
      std::cout << "beamformer:\n";
      print_matrix(b.f);
      print_links(s, b.f);
    } catch (const jcj::EtaSweepFailure& e) {
      std::cout << "\nJCJ failed: " << e.what() << "\n";
      for (const auto& a : e.attempts()) {
        std::cout << "  eta " << (a.eta ? fmt(*a.eta) : "none") << ": " << jcj::to_string(a.status)
                  << (a.message.empty() ? "" : " (" + a.message + ")") << "\n";
      }
      code = kExitInfeasible;
    } catch (const jcj::AllEtaInfeasible& e) {
      std::cout << "\nJCJ failed: " << e.what() << "\n";
      code = kExitInfeasible;
    } catch (const jcj::InfeasibleProblem& e) {
      std::cout << "\nJCJ failed: " << e.what() << "\n";
      code = kExitInfeasible;
    }
  }
  if (cfg.runs("ci")) {
    try {
      const jcj::CiBeamformer c = jcj::run_ci(s);
      std::cout << "\nCI: power " << fmt(c.power_mw) << " mW (" << fmt(jcj::mw_to_dbm(c.power_mw), "%.3f")
                << " dBm)\n";
      for (const auto& w : c.warnings) std::cout << "warning: " << w << "\n";
      print_links(s, c.f);
    } catch (const jcj::DimensionExceeded& e) {
      std::cout << "\nCI: " << e.what() << "\n";
    } catch (const jcj::RankDeficient& e) {
      std::cout << "\nCI: " << e.what() << "\n";
    }
  }
  return code;
}

int cmd_check(long vectors, int instances, std::uint64_t seed, const jcj::SolverOptions& so) {
  const auto t0 = std::chrono::steady_clock::now();
  const jcj::ShiftBoundStats st = jcj::shift_bound_suite(vectors, seed);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << "cyclic shift bound: " << st.vectors << " vectors, " << st.checks << " shifts, "
            << st.violations << " violations, min slack " << fmt(st.min_slack, "%.3e") << ", "
            << fmt(secs, "%.2f") << " s\n";

  jcj::ScenarioConfig sc;
  sc.n_tx = 4;
  sc.n_ue = 2;
  sc.n_uav = 1;
  int ok = 0, off = 0, uav = 0, eig = 0;
  for (int i = 0; i < instances; ++i) {
    const jcj::Scenario s = jcj::sample_scenario(sc, jcj::realization_seed(seed, i));
    const jcj::RelaxationStructure r = jcj::relaxation_structure(s, so);
    if (r.status != jcj::SdpStatus::Optimal) continue;
    ++ok;
    off += r.off_block_ratio <= 1e-5;
    uav += r.uav_block_ratio <= 1e-5;
    eig += r.second_eig_ratio >= 0.01;
  }
  std::cout << "relaxation structure (n_tx 4, n_ue 2, n_uav 1): " << ok << "/" << instances << " solved, "
            << "block diagonal " << off << ", zero jamming block " << uav << ", lambda2 >= 0.01 lambda1 "
            << eig << "\n";
  return st.violations == 0 ? kExitOk : kExitRuntime;
}

int cmd_oracle(int instances, std::uint64_t seed, const jcj::ExperimentConfig& cfg) {
  jcj::ScenarioConfig sc = cfg.scenario;
  sc.n_tx = 4;
  sc.n_ue = 1;
  sc.n_uav = 1;
  jcj::OracleOptions oo;
  oo.threads = cfg.threads;
  const jcj::JcjOptions jo = cfg.jcj_options();
  int holds = 0;
  std::cout << "  #   bound_mw        oracle_mw       jcj_mw\n";
  for (int i = 0; i < instances; ++i) {
    const jcj::Scenario s = jcj::sample_scenario(sc, jcj::realization_seed(seed, i));
    const jcj::SandwichPoint p = jcj::sandwich_point(s, jo, oo);
    const bool h = p.holds(1e-6);
    holds += h;
    std::printf("%3d  %.9e  %.9e  %.9e  %s%s\n", i, p.bound_mw, p.oracle_mw, p.jcj_mw, h ? "ok" : "VIOLATED",
                p.failure.empty() ? "" : (" " + p.failure).c_str());
  }
  std::printf("bound <= oracle <= jcj (1e-6 mW slack): %d/%d\n", holds, instances);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint communication and jamming beamforming experiments"};
  app.require_subcommand(1);

  CommonFlags run_c, solve_c, check_c, oracle_c;
  RunFlags run_f, solve_f;
  auto* run = app.add_subcommand("run", "Monte-Carlo experiment, writes CSV/SVG/manifest");
  add_common(run, run_c);
  run->add_option("--out", run_f.out, "output directory");
  run->add_option("--realizations", run_f.realizations, "realizations per sweep value");
  run->add_option("--scheme", run_f.schemes, "schemes to run (jcj, ci), repeatable or comma separated");
  run->add_option("--sweep", run_f.sweep, "sweep axis and values, e.g. n_tx=8,16,32");

  int realization = 0;
  auto* solve = app.add_subcommand("solve", "one scenario: beamformer and diagnostics");
  add_common(solve, solve_c);
  solve->add_option("--realization", realization, "realization index under the master seed")->check(CLI::NonNegativeNumber);
  solve->add_option("--scheme", solve_f.schemes, "schemes to run (jcj, ci)");

  long vectors = 10000;
  int instances = 50;
  auto* check = app.add_subcommand("check", "structural property suites");
  add_common(check, check_c);
  check->add_option("--vectors", vectors, "random vectors for the cyclic shift bound")->check(CLI::PositiveNumber);
  check->add_option("--instances", instances, "tiny relaxation instances")->check(CLI::NonNegativeNumber);

  int oracle_instances = 50;
  auto* oracle = app.add_subcommand("oracle", "tiny instances: relaxation bound, brute force, JCJ");
  add_common(oracle, oracle_c);
  oracle->add_option("--instances", oracle_instances, "instances")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return cmd_run(resolve(run_c, &run_f), run_c.verbose);
    if (*solve) {
      RunFlags only_schemes;
      only_schemes.schemes = solve_f.schemes;
      return cmd_solve(resolve(solve_c, &only_schemes), realization);
    }
    if (*check) {
      const auto cfg = resolve(check_c);
      return cmd_check(vectors, instances, cfg.master_seed, cfg.solver);
    }
    if (*oracle) {
      const auto cfg = resolve(oracle_c);
      return cmd_oracle(oracle_instances, cfg.master_seed, cfg);
    }
  } catch (const jcj::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
