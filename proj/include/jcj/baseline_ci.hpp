#pragma once

// Channel-inversion baseline: F = H^+ Lambda with per-stream loading chosen so
// every decoupled stream meets its threshold exactly.

#include <cmath>
#include <string>
#include <vector>

#include "jcj/channel.hpp"
#include "jcj/errors.hpp"
#include "jcj/hermitian.hpp"
#include "jcj/problem.hpp"

namespace jcj {

/// Singular values at or below this fraction of the largest count as zero.
inline constexpr double kRankTol = 1e-10;

/// Minimum-norm right inverse H^H (H H^H)^{-1} of a wide or square matrix,
/// from the eigendecomposition of H H^H.
inline ComplexMatrix pseudo_inverse(const ComplexMatrix& h) {
  if (h.rows() > h.cols()) {
    throw DimensionExceeded("pseudo_inverse: " + std::to_string(h.rows()) + " streams exceed " +
                            std::to_string(h.cols()) + " transmit antennas");
  }
  if (h.rows() == 0) return ComplexMatrix::Zero(h.cols(), 0);
  const EigenDecomposition e = eig_hermitian(HermitianMatrix::symmetrized(h * h.adjoint()));
  const double smax = std::sqrt(std::max(0.0, e.max_value()));
  const double smin = std::sqrt(std::max(0.0, e.min_value()));
  if (!(smax > 0.0) || smin <= kRankTol * smax) {
    throw RankDeficient("pseudo_inverse: channel matrix is rank deficient");
  }
  const RealVector inv = e.values.cwiseInverse();
  return h.adjoint() * (e.vectors * inv.cast<cplx>().asDiagonal() * e.vectors.adjoint());
}

struct CiLoading {
  RealVector lambda;  // sqrt(mW), UE entries first
  std::vector<std::string> warnings;
};

/// sqrt(sigma^2 (2^R - 1)) per UE, sqrt(P_e 10^{-Gamma/10} - sigma^2) per UAV.
inline CiLoading ci_loading(const Scenario& s) {
  CiLoading out;
  out.lambda.resize(s.n_streams());
  for (int n = 0; n < s.n_ue(); ++n) {
    out.lambda[n] = std::sqrt(s.ues[n].noise_power_mw * (std::exp2(s.r_th[n]) - 1.0));
  }
  for (int m = 0; m < s.n_uav(); ++m) {
    const double g = uav_rhs(s.uavs[m].eaves_power_mw, s.gamma_th_db[m], s.uavs[m].noise_power_mw);
    if (g < 0.0) {
      out.warnings.push_back("UAV " + std::to_string(m) + ": no jamming needed, loading set to 0");
    }
    out.lambda[s.n_ue() + m] = std::sqrt(std::max(0.0, g));
  }
  return out;
}

struct CiBeamformer {
  ComplexMatrix f;  // n_tx x n_streams
  RealVector lambda;
  double power_mw = 0.0;
  std::vector<std::string> warnings;
};

inline CiBeamformer run_ci(const Scenario& s) {
  s.validate();
  const ComplexMatrix hp = pseudo_inverse(s.stacked_channel());
  CiLoading l = ci_loading(s);
  CiBeamformer out;
  out.f = hp * l.lambda.cast<cplx>().asDiagonal();
  out.lambda = std::move(l.lambda);
  out.power_mw = out.f.squaredNorm();
  out.warnings = std::move(l.warnings);
  return out;
}

}  // namespace jcj
