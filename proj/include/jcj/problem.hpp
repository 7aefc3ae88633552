#pragma once

// SDP data of the joint communication/jamming power-minimization problem:
// lifted constraint matrices, right-hand sides and the cyclic-shift
// constraints that push the lifted solution toward rank one.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "jcj/channel.hpp"
#include "jcj/errors.hpp"
#include "jcj/hermitian.hpp"

namespace jcj {

/// P_k[i, (i+k) mod K] = 1.
inline RealMatrix circshift_identity(Index size, Index shift) {
  if (size < 1) throw DomainError("circshift_identity: size must be >= 1");
  if (shift < 0 || shift >= size) throw DomainError("circshift_identity: shift out of range");
  RealMatrix p = RealMatrix::Zero(size, size);
  for (Index i = 0; i < size; ++i) p(i, (i + shift) % size) = 1.0;
  return p;
}

/// One lifted constraint Re tr(A F~) (>= or ==) rhs.
struct LiftedConstraint {
  HermitianMatrix a;
  double rhs = 0.0;
  int terminal = -1;  // UE / UAV index, or shift k for cyclic constraints
};

/// Constraint matrices for every UE and UAV.  UAVs whose right-hand side is
/// nonpositive need no jamming and are listed in `dropped_uavs` instead.
struct ConstraintSet {
  Index dim = 0;
  int blocks = 0;  // stream blocks of size n_tx covered by `dim`
  bool reduced = false;
  std::vector<LiftedConstraint> a1;
  std::vector<LiftedConstraint> a2;
  std::vector<int> dropped_uavs;
  std::vector<std::string> warnings;
};

/// (2^R - 1) / 2^R sigma^2.
inline double ue_rhs(double r_th, double noise_mw) {
  const double t = std::exp2(r_th);
  return (t - 1.0) / t * noise_mw;
}

/// P_e 10^{-Gamma/10} - sigma^2.
inline double uav_rhs(double eaves_power_mw, double gamma_th_db, double noise_mw) {
  return eaves_power_mw * std::pow(10.0, -gamma_th_db / 10.0) - noise_mw;
}

/// Lifted matrices A_{1,n} = H~2^H H~2 - (2^R-1)/2^R H~1^H H~1 and
/// A_{2,m} = Hbar^H Hbar.  With `reduced` only the leading n_ue*n_tx block is kept.
inline ConstraintSet build_constraint_matrices(const Scenario& s, bool reduced = true) {
  s.validate();
  if (reduced && s.n_ue() < 1) {
    throw DomainError("build_constraint_matrices: reduced build needs at least one UE");
  }
  ConstraintSet out;
  out.reduced = reduced;
  out.blocks = reduced ? s.n_ue() : s.n_streams();
  const Index ntx = s.n_tx();
  out.dim = out.blocks * ntx;

  // I_blocks (x) h h^H
  auto replicated = [&](const ComplexVector& h) {
    const ComplexMatrix hh = h * h.adjoint();
    ComplexMatrix a = ComplexMatrix::Zero(out.dim, out.dim);
    for (int b = 0; b < out.blocks; ++b) a.block(b * ntx, b * ntx, ntx, ntx) = hh;
    return a;
  };

  for (int n = 0; n < s.n_ue(); ++n) {
    const ComplexVector h = s.h_ue.col(n);
    const double t = std::exp2(s.r_th[n]);
    const double c = (t - 1.0) / t;
    ComplexMatrix a = -c * replicated(h);
    a.block(n * ntx, n * ntx, ntx, ntx) += h * h.adjoint();
    out.a1.push_back({HermitianMatrix::symmetrized(a), ue_rhs(s.r_th[n], s.ues[n].noise_power_mw), n});
  }
  for (int m = 0; m < s.n_uav(); ++m) {
    const double rhs = uav_rhs(s.uavs[m].eaves_power_mw, s.gamma_th_db[m], s.uavs[m].noise_power_mw);
    if (!(rhs > 0.0)) {
      out.dropped_uavs.push_back(m);
      out.warnings.push_back("UAV " + std::to_string(m) +
                             ": noise alone meets the SINR threshold; jamming constraint dropped");
      continue;
    }
    out.a2.push_back({HermitianMatrix::symmetrized(replicated(s.h_uav.col(m))), rhs, m});
  }
  return out;
}

/// A_{3,k} = sym(Pbar_k) - eta I for k = 1 .. n_ue*n_tx - 1, where Pbar_k places
/// circshift_identity(n_ue*n_tx, k) on the UE block.  Only the Hermitian part
/// of Pbar_k is stored: the constraint is evaluated as Re tr(A F~).
inline std::vector<LiftedConstraint> build_eta_constraints(int n_ue, int n_tx, int n_uav, double eta,
                                                           bool reduced = true) {
  if (!(eta > 0.0 && eta < 1.0)) throw DomainError("build_eta_constraints: eta must lie in (0, 1)");
  if (n_ue < 1) throw DomainError("build_eta_constraints: needs at least one UE");
  if (n_tx < 1 || n_uav < 0) throw DomainError("build_eta_constraints: invalid dimensions");
  const Index k_ue = static_cast<Index>(n_ue) * n_tx;
  const Index dim = reduced ? k_ue : static_cast<Index>(n_ue + n_uav) * n_tx;
  std::vector<LiftedConstraint> out;
  out.reserve(static_cast<std::size_t>(k_ue - 1));
  for (Index k = 1; k < k_ue; ++k) {
    ComplexMatrix a = ComplexMatrix::Zero(dim, dim);
    for (Index i = 0; i < k_ue; ++i) {
      a(i, (i + k) % k_ue) += 0.5;
      a((i + k) % k_ue, i) += 0.5;
    }
    a.diagonal().array() -= eta;
    out.push_back({HermitianMatrix::symmetrized(a), 0.0, static_cast<int>(k)});
  }
  return out;
}

/// How the UE-rate and UAV-jamming constraints enter the SDP.
enum class ThresholdSense { Equality, Inequality };

/// Assembled SDP data for one eta (or for the plain relaxation when `eta` is empty).
struct JcjProblem {
  Index dim = 0;
  int n_tx = 0;
  int n_ue = 0;
  int n_uav = 0;
  std::vector<LiftedConstraint> a1;
  std::vector<LiftedConstraint> a2;
  std::vector<LiftedConstraint> a3;
  std::optional<double> eta;
  bool reduced = true;
  ThresholdSense sense = ThresholdSense::Equality;
  std::vector<int> dropped_uavs;
  std::vector<std::string> warnings;

  int blocks() const { return n_tx ? static_cast<int>(dim / n_tx) : 0; }
};

struct ProblemOptions {
  bool reduced = true;
  ThresholdSense sense = ThresholdSense::Equality;
};

inline JcjProblem build_problem(const Scenario& s, std::optional<double> eta,
                                const ProblemOptions& opts = {}) {
  ConstraintSet cs = build_constraint_matrices(s, opts.reduced);
  JcjProblem p;
  p.dim = cs.dim;
  p.n_tx = s.n_tx();
  p.n_ue = s.n_ue();
  p.n_uav = s.n_uav();
  p.a1 = std::move(cs.a1);
  p.a2 = std::move(cs.a2);
  p.eta = eta;
  p.reduced = opts.reduced;
  p.sense = opts.sense;
  p.dropped_uavs = std::move(cs.dropped_uavs);
  p.warnings = std::move(cs.warnings);
  if (eta) p.a3 = build_eta_constraints(s.n_ue(), s.n_tx(), s.n_uav(), *eta, opts.reduced);
  return p;
}

}  // namespace jcj
