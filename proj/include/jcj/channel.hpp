#pragma once

// Line-of-sight channel model for a uniform linear array: steering vectors,
// free-space large-scale fading and random scenario sampling.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "jcj/errors.hpp"
#include "jcj/hermitian.hpp"
#include "jcj/rng.hpp"

namespace jcj {

inline constexpr double kSpeedOfLight = 299792458.0;

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

struct ArrayGeometry {
  int n_tx = 16;
  double carrier_freq = 6e9;  // Hz
  double spacing = 0.0;       // m
  double tx_gain = 1.0;
  double rx_gain = 1.0;

  double wavelength() const { return kSpeedOfLight / carrier_freq; }

  /// Half-wavelength ULA at `carrier_freq`.
  static ArrayGeometry half_wavelength(int n_tx, double carrier_freq, double tx_gain = 1.0,
                                       double rx_gain = 1.0) {
    if (n_tx < 1) throw DomainError("ArrayGeometry: n_tx must be >= 1");
    if (!(carrier_freq > 0.0)) throw DomainError("ArrayGeometry: carrier frequency must be > 0");
    return ArrayGeometry{n_tx, carrier_freq, kSpeedOfLight / (2.0 * carrier_freq), tx_gain,
                         rx_gain};
  }
};

enum class TerminalKind { UE, UAV };

struct Terminal {
  TerminalKind kind = TerminalKind::UE;
  double range_m = 50.0;
  double aod_deg = 0.0;
  double phase_rad = 0.0;
  double noise_power_mw = 0.0;
  double eaves_power_mw = 0.0;  // UAV only: received power from its controller
};

/// exp(-j 2 pi k d/lambda sin(theta)), k = 0..n_tx-1.
inline ComplexVector steering(const ArrayGeometry& g, double aod_deg) {
  if (!(aod_deg >= -90.0 && aod_deg <= 90.0)) {
    throw DomainError("steering: angle of departure outside [-90, 90] degrees");
  }
  const double s = std::sin(aod_deg * std::numbers::pi / 180.0);
  const double ratio = g.spacing / g.wavelength();
  ComplexVector b(g.n_tx);
  for (int k = 0; k < g.n_tx; ++k) {
    b[k] = std::polar(1.0, -2.0 * std::numbers::pi * k * ratio * s);
  }
  return b;
}

/// e^{j xi} sqrt(G_tx G_rx lambda^2) / (4 pi r).
inline cplx path_gain(const ArrayGeometry& g, double range_m, double phase_rad) {
  if (!(range_m > 0.0)) throw DomainError("path_gain: range must be positive");
  const double lambda = g.wavelength();
  const double mag = std::sqrt(g.tx_gain * g.rx_gain * lambda * lambda) /
                     (4.0 * std::numbers::pi * range_m);
  return std::polar(mag, phase_rad);
}

inline ComplexVector channel(const ArrayGeometry& g, const Terminal& t) {
  return path_gain(g, t.range_m, t.phase_rad) * steering(g, t.aod_deg);
}

/// Physical and sampling parameters of one scenario family.
struct ScenarioConfig {
  double carrier_freq_hz = 6e9;
  double bandwidth_hz = 20e6;
  double noise_psd_dbm_hz = -174.0;
  /// Receiver noise power; when empty it is derived as N0 + 10 log10(B).
  std::optional<double> noise_power_dbm = -101.0;
  double eaves_power_dbm = -81.0;
  int n_ue = 2;
  int n_uav = 2;
  int n_tx = 16;
  double r_th = 7.0;          // bit/(s Hz)
  double gamma_th_db = 13.0;  // dB
  double range_min_m = 50.0;
  double range_max_m = 100.0;
  double aod_min_deg = -60.0;
  double aod_max_deg = 60.0;
  double min_ue_separation_deg = 5.0;
  double min_ue_uav_separation_deg = 0.0;
  double tx_gain = 1.0;
  double rx_gain = 1.0;
  int max_sampling_attempts = 10000;

  double noise_mw() const {
    return dbm_to_mw(noise_power_dbm ? *noise_power_dbm
                                     : noise_psd_dbm_hz + 10.0 * std::log10(bandwidth_hz));
  }
};

struct Scenario {
  ArrayGeometry geometry;
  std::vector<Terminal> ues;
  std::vector<Terminal> uavs;
  ComplexMatrix h_ue;   // n_tx x n_ue
  ComplexMatrix h_uav;  // n_tx x n_uav
  std::vector<double> r_th;         // per UE
  std::vector<double> gamma_th_db;  // per UAV

  int n_tx() const { return geometry.n_tx; }
  int n_ue() const { return static_cast<int>(ues.size()); }
  int n_uav() const { return static_cast<int>(uavs.size()); }
  int n_streams() const { return n_ue() + n_uav(); }

  /// H = [H_ue H_uav]^H, n_streams x n_tx.
  ComplexMatrix stacked_channel() const {
    ComplexMatrix h(n_streams(), n_tx());
    if (n_ue()) h.topRows(n_ue()) = h_ue.adjoint();
    if (n_uav()) h.bottomRows(n_uav()) = h_uav.adjoint();
    return h;
  }

  void validate() const {
    if (h_ue.rows() != n_tx() || h_ue.cols() != n_ue() || h_uav.rows() != n_tx() ||
        h_uav.cols() != n_uav()) {
      throw DimensionError("Scenario: channel matrix shapes disagree with terminal lists");
    }
    if (static_cast<int>(r_th.size()) != n_ue() ||
        static_cast<int>(gamma_th_db.size()) != n_uav()) {
      throw DimensionError("Scenario: threshold lists disagree with terminal lists");
    }
    for (const auto& t : ues) {
      if (!(t.noise_power_mw > 0.0)) throw DomainError("Scenario: UE noise power must be > 0");
    }
    for (const auto& t : uavs) {
      if (!(t.noise_power_mw > 0.0)) throw DomainError("Scenario: UAV noise power must be > 0");
      if (!(t.eaves_power_mw > 0.0)) throw DomainError("Scenario: UAV P_e must be > 0");
    }
  }
};

/// Builds a scenario whose channels follow the terminal geometry.
inline Scenario make_scenario(const ArrayGeometry& g, std::vector<Terminal> ues,
                              std::vector<Terminal> uavs, std::vector<double> r_th,
                              std::vector<double> gamma_th_db) {
  Scenario s;
  s.geometry = g;
  s.ues = std::move(ues);
  s.uavs = std::move(uavs);
  s.r_th = std::move(r_th);
  s.gamma_th_db = std::move(gamma_th_db);
  s.h_ue.resize(g.n_tx, s.n_ue());
  s.h_uav.resize(g.n_tx, s.n_uav());
  for (int n = 0; n < s.n_ue(); ++n) s.h_ue.col(n) = channel(g, s.ues[n]);
  for (int m = 0; m < s.n_uav(); ++m) s.h_uav.col(m) = channel(g, s.uavs[m]);
  s.validate();
  return s;
}

namespace detail {

inline bool separated(const std::vector<double>& a, double min_sep) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      if (std::abs(a[i] - a[j]) < min_sep) return false;
    }
  }
  return true;
}

inline bool separated_from(const std::vector<double>& a, const std::vector<double>& b,
                           double min_sep) {
  for (double x : a) {
    for (double y : b) {
      if (std::abs(x - y) < min_sep) return false;
    }
  }
  return true;
}

}  // namespace detail

/// Draws one random scenario.  UE angles are redrawn jointly until every pair is
/// at least `min_ue_separation_deg` apart; UAV angles likewise against the UEs
/// when `min_ue_uav_separation_deg` > 0.
inline Scenario sample_scenario(const ScenarioConfig& cfg, std::uint64_t seed) {
  if (cfg.n_ue < 0 || cfg.n_uav < 0) throw DomainError("sample_scenario: negative terminal count");
  const ArrayGeometry g =
      ArrayGeometry::half_wavelength(cfg.n_tx, cfg.carrier_freq_hz, cfg.tx_gain, cfg.rx_gain);
  CounterRng rng(seed);

  std::vector<double> ue_aod(cfg.n_ue);
  bool ok = false;
  for (int attempt = 0; attempt < cfg.max_sampling_attempts && !ok; ++attempt) {
    for (auto& a : ue_aod) a = rng.uniform(cfg.aod_min_deg, cfg.aod_max_deg);
    ok = detail::separated(ue_aod, cfg.min_ue_separation_deg);
  }
  if (!ok) {
    throw DomainError("sample_scenario: UE angular separation unattainable within attempt cap");
  }
  std::vector<double> uav_aod(cfg.n_uav);
  ok = false;
  for (int attempt = 0; attempt < cfg.max_sampling_attempts && !ok; ++attempt) {
    for (auto& a : uav_aod) a = rng.uniform(cfg.aod_min_deg, cfg.aod_max_deg);
    ok = cfg.min_ue_uav_separation_deg <= 0.0 ||
         detail::separated_from(ue_aod, uav_aod, cfg.min_ue_uav_separation_deg);
  }
  if (!ok) {
    throw DomainError("sample_scenario: UE-UAV angular separation unattainable within attempt cap");
  }

  const double noise = cfg.noise_mw();
  const double pe = dbm_to_mw(cfg.eaves_power_dbm);
  auto draw = [&](TerminalKind kind, double aod) {
    Terminal t;
    t.kind = kind;
    t.aod_deg = aod;
    t.range_m = rng.uniform(cfg.range_min_m, cfg.range_max_m);
    t.phase_rad = rng.uniform(0.0, 2.0 * std::numbers::pi);
    t.noise_power_mw = noise;
    if (kind == TerminalKind::UAV) t.eaves_power_mw = pe;
    return t;
  };
  std::vector<Terminal> ues, uavs;
  for (double a : ue_aod) ues.push_back(draw(TerminalKind::UE, a));
  for (double a : uav_aod) uavs.push_back(draw(TerminalKind::UAV, a));
  return make_scenario(g, std::move(ues), std::move(uavs),
                       std::vector<double>(cfg.n_ue, cfg.r_th),
                       std::vector<double>(cfg.n_uav, cfg.gamma_th_db));
}

}  // namespace jcj
