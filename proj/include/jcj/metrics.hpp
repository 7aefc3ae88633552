#pragma once

// Link-level performance functionals, the BER -> SINR threshold and empirical
// CDF helpers.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "jcj/channel.hpp"
#include "jcj/errors.hpp"
#include "jcj/hermitian.hpp"
#include "jcj/problem.hpp"

namespace jcj {

/// log2(1 + |h^H f_n|^2 / (sigma^2 + sum_{j != n} |h^H f_j|^2)).
inline double achievable_rate(const ComplexVector& h, const ComplexMatrix& f, int ue_index,
                              double noise_mw) {
  if (h.size() != f.rows()) throw DimensionError("achievable_rate: channel / beamformer mismatch");
  if (ue_index < 0 || ue_index >= f.cols()) throw DomainError("achievable_rate: stream index out of range");
  const RealVector p = (h.adjoint() * f).cwiseAbs2().transpose();
  const double sig = p[ue_index];
  const double interf = std::max(0.0, p.sum() - sig);
  return std::log2(1.0 + sig / (noise_mw + interf));
}

/// 10 log10(P_e / (||h^H F||^2 + sigma^2)).
inline double uav_sinr_db(const ComplexVector& h, const ComplexMatrix& f, double eaves_power_mw,
                          double noise_mw) {
  if (!(eaves_power_mw > 0.0)) throw DomainError("uav_sinr_db: P_e must be > 0");
  if (h.size() != f.rows()) throw DimensionError("uav_sinr_db: channel / beamformer mismatch");
  const double jam = f.cols() ? (h.adjoint() * f).squaredNorm() : 0.0;
  return 10.0 * std::log10(eaves_power_mw / (jam + noise_mw));
}

/// Q(x) = 1/2 erfc(x / sqrt 2).
inline double q_function(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

/// Inverse of erfc on (0, 2).  Rational starting point followed by Halley
/// steps on std::erfc; converges to a few ulp.
inline double erfc_inv(double y) {
  if (!(y > 0.0 && y < 2.0)) throw DomainError("erfc_inv: argument must lie in (0, 2)");
  if (y == 1.0) return 0.0;
  // erfc_inv(2 - y) = -erfc_inv(y)
  const bool neg = y > 1.0;
  const double yy = neg ? 2.0 - y : y;
  // Initial guess from the normal-quantile tail form.
  const double t = std::sqrt(-2.0 * std::log(yy / 2.0));
  double x = -0.70711 * ((2.30753 + t * 0.27061) / (1.0 + t * (0.99229 + t * 0.04481)) - t);
  for (int i = 0; i < 8; ++i) {
    const double err = std::erfc(x) - yy;
    const double deriv = -2.0 / std::sqrt(std::numbers::pi) * std::exp(-x * x);
    const double step = err / deriv;
    const double halley = step / (1.0 + x * step);  // erfc'' / erfc' = -2x
    x -= halley;
    if (std::abs(halley) <= 1e-16 * std::max(1.0, std::abs(x))) break;
  }
  return neg ? -x : x;
}

/// erf^{-1} on (-1, 1).
inline double erf_inv(double y) {
  if (!(y > -1.0 && y < 1.0)) throw DomainError("erf_inv: argument must lie in (-1, 1)");
  double x = erfc_inv(1.0 - y);
  if (std::abs(y) > 0.5) return x;
  // 1 - y drops the low digits of small y; polish against erf itself.
  for (int i = 0; i < 3; ++i) {
    const double step = (std::erf(x) - y) / (2.0 / std::sqrt(std::numbers::pi) * std::exp(-x * x));
    x -= step / (1.0 + x * step);  // erf'' / erf' = -2x
  }
  return x;
}

/// Q^{-1}(p) for p in (0, 1).
inline double q_inverse(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("q_inverse: probability must lie in (0, 1)");
  return std::numbers::sqrt2 * erfc_inv(2.0 * p);
}

/// SINR (dB) at which square K-QAM reaches symbol-error-based BER `ber`:
/// 10 log10([Q^{-1}(ber/4)]^2 (K - 1) / 3).
inline double sinr_threshold_db(double ber, int k) {
  if (!(ber > 0.0 && ber < 1.0)) throw DomainError("sinr_threshold_db: ber must lie in (0, 1)");
  if (k < 2) throw DomainError("sinr_threshold_db: modulation order must be >= 2");
  const double q = q_inverse(ber / 4.0);
  return 10.0 * std::log10(q * q * (k - 1) / 3.0);
}

/// Inverse of sinr_threshold_db: 4 Q(sqrt(3 SINR / (K - 1))).
inline double ber_from_sinr_db(double sinr_db, int k) {
  if (k < 2) throw DomainError("ber_from_sinr_db: modulation order must be >= 2");
  return 4.0 * q_function(std::sqrt(3.0 * db_to_linear(sinr_db) / (k - 1)));
}

/// Per-terminal rates and SINRs of beamformer `f` (n_tx x n_streams, UE columns first).
struct LinkReport {
  std::vector<double> rates;     // per UE, bit/(s Hz)
  std::vector<double> sinrs_db;  // per UAV
};

inline LinkReport evaluate_links(const Scenario& s, const ComplexMatrix& f) {
  if (f.rows() != s.n_tx() || f.cols() < s.n_ue()) {
    throw DimensionError("evaluate_links: beamformer shape does not match scenario");
  }
  LinkReport r;
  for (int n = 0; n < s.n_ue(); ++n) {
    r.rates.push_back(achievable_rate(s.h_ue.col(n), f, n, s.ues[n].noise_power_mw));
  }
  for (int m = 0; m < s.n_uav(); ++m) {
    r.sinrs_db.push_back(
        uav_sinr_db(s.h_uav.col(m), f, s.uavs[m].eaves_power_mw, s.uavs[m].noise_power_mw));
  }
  return r;
}

/// UAVs whose jamming requirement is active (P_e 10^{-Gamma/10} > sigma^2).
inline std::vector<bool> active_uavs(const Scenario& s) {
  std::vector<bool> a(s.n_uav());
  for (int m = 0; m < s.n_uav(); ++m) {
    a[m] = uav_rhs(s.uavs[m].eaves_power_mw, s.gamma_th_db[m], s.uavs[m].noise_power_mw) > 0.0;
  }
  return a;
}

/// max_n |R_n - R_th| and max_m |Gamma_m - Gamma_th| (active UAVs only).
struct LinkErrors {
  double rate_error = 0.0;
  double sinr_error = 0.0;
  double rate_shortfall = 0.0;  // max_n (R_th - R_n)^+
  double sinr_excess = 0.0;     // max_m (Gamma_m - Gamma_th)^+
};

inline LinkErrors link_errors(const Scenario& s, const ComplexMatrix& f) {
  const LinkReport r = evaluate_links(s, f);
  const std::vector<bool> active = active_uavs(s);
  LinkErrors e;
  for (int n = 0; n < s.n_ue(); ++n) {
    e.rate_error = std::max(e.rate_error, std::abs(r.rates[n] - s.r_th[n]));
    e.rate_shortfall = std::max(e.rate_shortfall, s.r_th[n] - r.rates[n]);
  }
  for (int m = 0; m < s.n_uav(); ++m) {
    if (!active[m]) continue;
    e.sinr_error = std::max(e.sinr_error, std::abs(r.sinrs_db[m] - s.gamma_th_db[m]));
    e.sinr_excess = std::max(e.sinr_excess, r.sinrs_db[m] - s.gamma_th_db[m]);
  }
  return e;
}

struct RealizationResult {
  std::optional<double> jcj_power_mw;
  std::optional<double> ci_power_mw;
  std::optional<double> sdr_power_mw;
  std::optional<double> rate_error;   // JCJ, bit/(s Hz)
  std::optional<double> sinr_error;   // JCJ, dB
  std::optional<double> ci_rate_error;
  std::optional<double> ci_sinr_error;
  std::optional<double> power_error_mw;          // |P_sdr - P_jcj|
  std::optional<double> normalized_power_error;  // power_error / P_jcj
};

/// Metrics of one realization; any scheme may be absent (failed or not run).
inline RealizationResult realization_metrics(const Scenario& s, const ComplexMatrix* jcj_f,
                                             const ComplexMatrix* ci_f,
                                             std::optional<double> sdr_bound_mw) {
  RealizationResult r;
  r.sdr_power_mw = sdr_bound_mw;
  if (jcj_f) {
    r.jcj_power_mw = jcj_f->squaredNorm();
    const LinkErrors e = link_errors(s, *jcj_f);
    r.rate_error = e.rate_error;
    r.sinr_error = e.sinr_error;
    if (sdr_bound_mw) {
      r.power_error_mw = std::abs(*sdr_bound_mw - *r.jcj_power_mw);
      if (*r.jcj_power_mw > 0.0) r.normalized_power_error = *r.power_error_mw / *r.jcj_power_mw;
    }
  }
  if (ci_f) {
    r.ci_power_mw = ci_f->squaredNorm();
    const LinkErrors e = link_errors(s, *ci_f);
    r.ci_rate_error = e.rate_error;
    r.ci_sinr_error = e.sinr_error;
  }
  return r;
}

struct CdfSeries {
  std::vector<double> values;
  std::vector<double> probabilities;
};

inline CdfSeries empirical_cdf(std::vector<double> values) {
  if (values.empty()) throw DomainError("empirical_cdf: empty input");
  for (double v : values) {
    if (std::isnan(v)) throw DomainError("empirical_cdf: NaN value");
  }
  std::sort(values.begin(), values.end());
  CdfSeries c;
  const double n = static_cast<double>(values.size());
  c.probabilities.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) c.probabilities.push_back((i + 1) / n);
  c.probabilities.back() = 1.0;
  c.values = std::move(values);
  return c;
}

/// Nearest-rank percentile: the ceil(p N)-th smallest value, p in (0, 1].
inline double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw DomainError("percentile: empty input");
  if (!(p > 0.0 && p <= 1.0)) throw DomainError("percentile: p must lie in (0, 1]");
  std::sort(values.begin(), values.end());
  const auto n = values.size();
  auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n) - 1e-12));
  rank = std::clamp<std::size_t>(rank, 1, n);
  return values[rank - 1];
}

}  // namespace jcj
