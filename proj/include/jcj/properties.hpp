#pragma once

// Randomized structural checks shared by the command-line `check` suite and
// the test binaries.

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "jcj/channel.hpp"
#include "jcj/hermitian.hpp"
#include "jcj/jcj.hpp"
#include "jcj/oracle.hpp"
#include "jcj/problem.hpp"
#include "jcj/rng.hpp"
#include "jcj/sdp.hpp"

namespace jcj {

/// Re tr(A P_k) = Re sum_j A[(j + k) mod K, j], without forming P_k.
inline double re_trace_shift(const ComplexMatrix& a, Index k) {
  const Index n = a.rows();
  if (a.cols() != n) throw DimensionError("re_trace_shift: matrix must be square");
  if (k < 0 || k >= n) throw DomainError("re_trace_shift: shift out of range");
  double acc = 0.0;
  for (Index j = 0; j < n; ++j) acc += a((j + k) % n, j).real();
  return acc;
}

inline ComplexVector random_complex_vector(CounterRng& rng, Index n) {
  ComplexVector a(n);
  for (Index i = 0; i < n; ++i) a[i] = cplx(rng.normal(), rng.normal());
  return a;
}

struct ShiftBoundStats {
  long vectors = 0;
  long checks = 0;
  long violations = 0;
  double min_slack = std::numeric_limits<double>::infinity();  // (tr A - Re tr A P_k) / ||a||^2
};

/// Re tr(a a^H) >= Re tr(a a^H P_k) for random a of size [dmin, dmax] and every k.
inline ShiftBoundStats shift_bound_suite(long n_vectors, std::uint64_t seed, int dmin = 2,
                                         int dmax = 64, double tol = 1e-9) {
  ShiftBoundStats st;
  CounterRng rng(seed);
  for (long v = 0; v < n_vectors; ++v) {
    const int d = dmin + static_cast<int>(rng.uniform01() * (dmax - dmin + 1));
    const ComplexVector a = random_complex_vector(rng, std::min(d, dmax));
    const double nrm2 = a.squaredNorm();
    // a_{j+k} conj(a_j) summed over j is the cyclic autocorrelation.
    for (Index k = 0; k < a.size(); ++k) {
      double lag = 0.0;
      for (Index j = 0; j < a.size(); ++j) lag += (a[(j + k) % a.size()] * std::conj(a[j])).real();
      const double slack = (nrm2 - lag) / nrm2;
      st.min_slack = std::min(st.min_slack, slack);
      ++st.checks;
      if (slack < -tol) ++st.violations;
    }
    ++st.vectors;
  }
  return st;
}

/// Structure of one full-size relaxation solution (no cyclic constraints).
struct RelaxationStructure {
  SdpStatus status = SdpStatus::NumericalFailure;
  double trace = 0.0;
  double off_block_ratio = 0.0;  // ||X - blkdiag(X)||_F / tr X
  double uav_block_ratio = 0.0;  // ||UAV diagonal blocks||_F / tr X
  double second_eig_ratio = 0.0;  // lambda_2 / lambda_1
};

inline RelaxationStructure relaxation_structure(const Scenario& s, const SolverOptions& so = {},
                                                ThresholdSense sense = ThresholdSense::Inequality) {
  ProblemOptions po;
  po.reduced = false;
  po.sense = sense;
  const JcjProblem p = build_problem(s, std::nullopt, po);
  const SdpSolution sol = solve(to_sdp_spec(p), so);
  RelaxationStructure r;
  r.status = sol.status;
  if (sol.status != SdpStatus::Optimal) return r;
  const ComplexMatrix& x = sol.x.matrix();
  const Index ntx = s.n_tx();
  r.trace = sol.x.trace();
  ComplexMatrix off = x;
  double uav2 = 0.0;
  for (int b = 0; b < s.n_streams(); ++b) {
    off.block(b * ntx, b * ntx, ntx, ntx).setZero();
    if (b >= s.n_ue()) uav2 += x.block(b * ntx, b * ntx, ntx, ntx).squaredNorm();
  }
  r.off_block_ratio = off.norm() / r.trace;
  r.uav_block_ratio = std::sqrt(uav2) / r.trace;
  const RealVector ev = eigenvalues_hermitian(sol.x);
  r.second_eig_ratio = ev.size() > 1 && ev[0] > 0.0 ? ev[1] / ev[0] : 0.0;
  return r;
}

/// Relaxation bound, brute-force optimum and JCJ power of one tiny instance.
struct SandwichPoint {
  double bound_mw = 0.0;
  double oracle_mw = 0.0;
  double jcj_mw = 0.0;
  bool oracle_feasible = false;
  std::string failure;  // nonempty if a stage threw

  bool holds(double slack_mw) const {
    return failure.empty() && oracle_feasible && bound_mw <= oracle_mw + slack_mw &&
           oracle_mw <= jcj_mw + slack_mw;
  }
};

inline SandwichPoint sandwich_point(const Scenario& s, const JcjOptions& jo = {},
                                    const OracleOptions& oo = {}) {
  SandwichPoint r;
  try {
    const Beamformer b = run_jcj(s, EtaSweep::standard(), jo);
    r.jcj_mw = b.power_mw;
    r.bound_mw = b.relaxation_power_mw ? *b.relaxation_power_mw : lower_bound_power(s, jo);
    const OracleResult o = oracle_solve(s, oo);
    r.oracle_mw = o.best_power_mw;
    r.oracle_feasible = o.feasible_found;
  } catch (const std::exception& e) {
    r.failure = e.what();
  }
  return r;
}

}  // namespace jcj
