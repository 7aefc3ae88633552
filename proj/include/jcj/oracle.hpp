#pragma once

// Brute-force reference for tiny instances: minimize ||f||^2 directly over the
// stacked beamformer subject to the per-terminal equality constraints, by
// augmented-Lagrangian Newton descent from many random starts.  Shares no
// code with the relaxation pipeline beyond the channel model.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "jcj/channel.hpp"
#include "jcj/errors.hpp"
#include "jcj/hermitian.hpp"
#include "jcj/parallel.hpp"
#include "jcj/rng.hpp"

namespace jcj {

struct OracleOptions {
  int n_starts = 64;
  int rounds = 8;          // penalty doublings
  int inner_iters = 100;   // Newton steps per round
  double initial_penalty = 1e4;  // on constraints normalized to unit rhs
  double feas_tol = 1e-4;  // accepted max relative constraint violation
  bool jamming_streams = true;  // optimize the UAV columns too (else they stay zero)
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

struct OracleResult {
  ComplexMatrix best_f;  // n_tx x n_streams
  double best_power_mw = std::numeric_limits<double>::infinity();
  int starts_tried = 0;
  int feasible_starts = 0;
  bool feasible_found = false;
  double max_violation = std::numeric_limits<double>::infinity();  // of best_f, relative
};

namespace detail {

struct QuadConstraint {
  RealMatrix q;  // real form: value = x^T q x
  double rhs;
};

/// Real quadratic forms of the UE-rate and UAV-SINR equalities in x = [Re f; Im f].
inline std::vector<QuadConstraint> oracle_constraints(const Scenario& s, int cols) {
  const int ntx = s.n_tx();
  const Index n = static_cast<Index>(cols) * ntx;
  auto embed = [&](const ComplexMatrix& c) {
    RealMatrix r(2 * n, 2 * n);
    r << c.real(), -c.imag(), c.imag(), c.real();
    return r;
  };
  std::vector<QuadConstraint> out;
  for (int u = 0; u < s.n_ue(); ++u) {
    const ComplexVector h = s.h_ue.col(u);
    const ComplexMatrix hh = h * h.adjoint();
    const double t = std::exp2(s.r_th[u]);
    const double c = (t - 1.0) / t;
    ComplexMatrix q = ComplexMatrix::Zero(n, n);
    for (int j = 0; j < cols; ++j) q.block(j * ntx, j * ntx, ntx, ntx) = (j == u ? 1.0 - c : -c) * hh;
    out.push_back({embed(q), c * s.ues[u].noise_power_mw});
  }
  for (int m = 0; m < s.n_uav(); ++m) {
    const double g = s.uavs[m].eaves_power_mw * std::pow(10.0, -s.gamma_th_db[m] / 10.0) -
                     s.uavs[m].noise_power_mw;
    if (!(g > 0.0)) continue;
    const ComplexVector h = s.h_uav.col(m);
    const ComplexMatrix hh = h * h.adjoint();
    ComplexMatrix q = ComplexMatrix::Zero(n, n);
    for (int j = 0; j < cols; ++j) q.block(j * ntx, j * ntx, ntx, ntx) = hh;
    out.push_back({embed(q), g});
  }
  return out;
}

}  // namespace detail

inline OracleResult oracle_solve(const Scenario& s, const OracleOptions& opts = {}) {
  if (static_cast<long>(s.n_ue()) * s.n_tx() > 8) {
    throw DomainError("oracle_solve: only for n_ue * n_tx <= 8");
  }
  if (opts.n_starts < 1 || opts.rounds < 1 || opts.inner_iters < 1) {
    throw DomainError("oracle_solve: budget parameters must be positive");
  }
  const int ntx = s.n_tx();
  const int cols = opts.jamming_streams ? s.n_streams() : s.n_ue();
  const Index n = static_cast<Index>(cols) * ntx;
  OracleResult res;
  res.best_f = ComplexMatrix::Zero(ntx, s.n_streams());
  const auto cons = detail::oracle_constraints(s, cols);
  if (cons.empty() || n == 0) {
    res.best_power_mw = 0.0;
    res.feasible_found = true;
    res.max_violation = 0.0;
    res.starts_tried = 0;
    return res;
  }

  // Normalize: constraints to unit rhs, variable so that the typical |x| is O(1).
  const std::size_t m = cons.size();
  std::vector<RealMatrix> q(m);
  double gain = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    q[i] = cons[i].q / cons[i].rhs;
    gain = std::max(gain, q[i].cwiseAbs().maxCoeff());
  }
  const double xs = 1.0 / std::sqrt(gain);  // x = xs * u
  for (auto& qi : q) qi *= xs * xs;         // u^T q_i u = 1 at feasibility

  auto viol = [&](const RealVector& u) {
    RealVector c(m);
    for (std::size_t i = 0; i < m; ++i) c[i] = u.dot(q[i] * u) - 1.0;
    return c;
  };

  struct Start {
    RealVector u;
    double power = std::numeric_limits<double>::infinity();
    double violation = std::numeric_limits<double>::infinity();
  };
  std::vector<Start> starts(opts.n_starts);

  auto run = [&](std::size_t k) {
    CounterRng rng = CounterRng::for_stream(opts.seed, k);
    RealVector u(2 * n);
    for (Index i = 0; i < u.size(); ++i) u[i] = rng.normal();
    RealVector lam = RealVector::Zero(m);
    double rho = opts.initial_penalty;
    const RealMatrix eye = RealMatrix::Identity(2 * n, 2 * n);

    auto merit = [&](const RealVector& x) {
      const RealVector c = viol(x);
      return x.squaredNorm() + lam.dot(c) + 0.5 * rho * c.squaredNorm();
    };
    for (int round = 0; round < opts.rounds; ++round) {
      for (int it = 0; it < opts.inner_iters; ++it) {
        const RealVector c = viol(u);
        RealVector g = 2.0 * u;
        RealMatrix hess = 2.0 * eye;
        for (std::size_t i = 0; i < m; ++i) {
          const RealVector gi = 2.0 * q[i] * u;
          const double w = lam[i] + rho * c[i];
          g += w * gi;
          hess += 2.0 * w * q[i] + rho * gi * gi.transpose();
        }
        if (g.norm() <= 1e-13 * std::max(1.0, u.norm())) break;
        // Shift until positive definite.
        double shift = 0.0;
        Eigen::LLT<RealMatrix> llt;
        for (int tries = 0; tries < 60; ++tries) {
          llt.compute(hess + shift * eye);
          if (llt.info() == Eigen::Success) break;
          shift = shift == 0.0 ? 1e-8 * std::max(1.0, hess.diagonal().cwiseAbs().maxCoeff()) : 4.0 * shift;
        }
        RealVector d = llt.info() == Eigen::Success ? RealVector(-llt.solve(g)) : RealVector(-g);
        const double m0 = merit(u);
        const double slope = g.dot(d);
        if (slope >= 0.0) d = -g;
        double t = 1.0;
        bool moved = false;
        for (int ls = 0; ls < 50; ++ls) {
          const RealVector cand = u + t * d;
          if (merit(cand) <= m0 + 1e-4 * t * std::min(0.0, g.dot(d))) {
            u = cand;
            moved = true;
            break;
          }
          t *= 0.5;
        }
        if (!moved) break;
      }
      lam += rho * viol(u);
      rho *= 2.0;
    }

    // Newton on the KKT system of min ||u||^2 s.t. c(u) = 0, from the multiplier
    // estimate; kept only while the KKT residual decreases.
    auto kkt_residual = [&](const RealVector& x, const RealVector& l) {
      RealVector g = 2.0 * x;
      for (std::size_t i = 0; i < m; ++i) g += l[i] * 2.0 * q[i] * x;
      return std::sqrt(g.squaredNorm() + viol(x).squaredNorm());
    };
    for (int it = 0; it < 20; ++it) {
      const Index d = 2 * n;
      RealMatrix kkt = RealMatrix::Zero(d + m, d + m);
      RealVector rhs(d + m);
      kkt.topLeftCorner(d, d) = 2.0 * eye;
      for (std::size_t i = 0; i < m; ++i) {
        kkt.topLeftCorner(d, d) += 2.0 * lam[i] * q[i];
        const RealVector gi = 2.0 * q[i] * u;
        kkt.block(0, d + i, d, 1) = gi;
        kkt.block(d + i, 0, 1, d) = gi.transpose();
      }
      rhs.head(d) = -2.0 * u;
      rhs.tail(m) = -viol(u);
      const RealVector sol = kkt.fullPivLu().solve(rhs);
      if (!sol.allFinite()) break;
      const RealVector u_new = u + sol.head(d);
      const RealVector lam_new = sol.tail(m);
      const double r0 = kkt_residual(u, lam);
      const double r1 = kkt_residual(u_new, lam_new);
      if (!(r1 < r0)) break;
      u = u_new;
      lam = lam_new;
      if (r1 <= 1e-14) break;
    }

    // Feasibility restoration: minimum-norm Gauss-Newton steps onto c(u) = 0.
    for (int it = 0; it < 20; ++it) {
      const RealVector c = viol(u);
      if (c.cwiseAbs().maxCoeff() <= 1e-14) break;
      RealMatrix jac(m, 2 * n);
      for (std::size_t i = 0; i < m; ++i) jac.row(i) = (2.0 * q[i] * u).transpose();
      const RealMatrix jjt = jac * jac.transpose();
      Eigen::LDLT<RealMatrix> ldlt(jjt);
      if (ldlt.info() != Eigen::Success) break;
      const RealVector step = jac.transpose() * ldlt.solve(c);
      if (!step.allFinite()) break;
      u -= step;
    }

    starts[k].u = u;
    starts[k].violation = viol(u).cwiseAbs().maxCoeff();
    starts[k].power = u.squaredNorm() * xs * xs;
  };
  parallel_for(starts.size(), opts.threads, run);

  res.starts_tried = opts.n_starts;
  std::optional<std::size_t> best;
  for (std::size_t k = 0; k < starts.size(); ++k) {
    if (!(starts[k].violation <= opts.feas_tol)) continue;
    ++res.feasible_starts;
    if (!best || starts[k].power < starts[*best].power) best = k;
  }
  if (!best) return res;
  res.feasible_found = true;
  res.best_power_mw = starts[*best].power;
  res.max_violation = starts[*best].violation;
  const RealVector x = starts[*best].u * xs;
  for (int j = 0; j < cols; ++j) {
    for (int r = 0; r < ntx; ++r) {
      const Index idx = static_cast<Index>(j) * ntx + r;
      res.best_f(r, j) = cplx(x[idx], x[n + idx]);
    }
  }
  return res;
}

}  // namespace jcj
