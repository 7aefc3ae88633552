#pragma once

// Joint communication and jamming beamformer: sweep the cyclic-diagonal
// weight eta, solve the constrained relaxation for each value, take the scaled
// dominant eigenvector as the candidate beamformer and keep the candidate whose
// constraint values deviate least from the thresholds.

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "jcj/channel.hpp"
#include "jcj/errors.hpp"
#include "jcj/hermitian.hpp"
#include "jcj/parallel.hpp"
#include "jcj/problem.hpp"
#include "jcj/sdp.hpp"

namespace jcj {

struct EtaSweep {
  std::vector<double> phi;

  static EtaSweep standard() {
    return {{0.01, 0.02, 0.03, 0.04, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}};
  }

  void validate() const {
    if (phi.empty()) throw DomainError("EtaSweep: empty sweep");
    for (std::size_t i = 0; i < phi.size(); ++i) {
      if (!(phi[i] > 0.0 && phi[i] < 1.0)) throw DomainError("EtaSweep: values must lie in (0, 1)");
      if (i && !(phi[i] > phi[i - 1])) throw DomainError("EtaSweep: values must be strictly increasing");
    }
  }
};

/// How candidate deviations |gamma - gamma_hat| are normalized before the max.
enum class ErrorScale { Relative, Absolute };

struct CandidateSolution {
  std::optional<double> eta;  // empty for the plain relaxation
  ComplexVector f_hat;        // sqrt(lambda_max) v_max, length dim
  ComplexMatrix f_mat;        // n_tx x n_streams, column i = f_hat[i*n_tx : (i+1)*n_tx]
  double error = std::numeric_limits<double>::infinity();
  double rank1_ratio = 0.0;  // lambda_max / trace
};

/// One entry of the sweep log.
struct EtaAttempt {
  std::optional<double> eta;
  SdpStatus status = SdpStatus::NumericalFailure;
  double error = std::numeric_limits<double>::infinity();
  double rank1_ratio = 0.0;
  double sdp_power_mw = 0.0;
  int iterations = 0;
  std::string message;
};

struct Beamformer {
  ComplexMatrix f;  // n_tx x n_streams
  double power_mw = 0.0;
  std::optional<double> chosen_eta;
  double error = 0.0;
  double rank1_ratio = 1.0;
  std::optional<double> relaxation_power_mw;  // tr of the eta-free relaxation, when solved
  std::vector<EtaAttempt> per_eta_errors;
  std::vector<std::string> warnings;
};

/// All sweep values failed; carries the per-value log.
class EtaSweepFailure : public AllEtaInfeasible {
 public:
  EtaSweepFailure(const std::string& what, std::vector<EtaAttempt> attempts)
      : AllEtaInfeasible(what), attempts_(std::move(attempts)) {}
  const std::vector<EtaAttempt>& attempts() const noexcept { return attempts_; }

 private:
  std::vector<EtaAttempt> attempts_;
};

struct JcjOptions {
  SolverOptions solver;
  ProblemOptions problem;
  ErrorScale error_scale = ErrorScale::Relative;
  /// Also score the eta-free relaxation as a candidate (labelled "no eta").
  bool relaxation_candidate = true;
  /// Errors within this much of the minimum count as ties (relative units;
  /// scaled by the smallest |gamma| in absolute mode).  Rank-one candidates
  /// differ only by solver noise, so exact float ties never happen.
  double tie_tolerance = 1e-6;
  unsigned threads = 1;  // 0 = hardware concurrency
};

/// Translates assembled problem data into solver input.  Shift k and K - k give
/// the same Re-trace functional, so only k <= K/2 are passed on.
inline SdpSpec to_sdp_spec(const JcjProblem& p) {
  SdpSpec s = SdpSpec::min_trace(p.dim);
  auto add = [&](const LiftedConstraint& c) {
    if (p.sense == ThresholdSense::Equality) {
      s.eq_constraints.push_back({c.a, c.rhs});
    } else {
      s.ineq_constraints.push_back({c.a, c.rhs, Sense::GreaterEqual});
    }
  };
  for (const auto& c : p.a1) add(c);
  for (const auto& c : p.a2) add(c);
  const int k_ue = p.n_ue * p.n_tx;
  for (const auto& c : p.a3) {
    if (2 * c.terminal <= k_ue) s.ineq_constraints.push_back({c.a, c.rhs, Sense::GreaterEqual});
  }
  return s;
}

inline CandidateSolution extract_candidate(const SdpSolution& x, int n_tx, int n_streams) {
  if (x.status != SdpStatus::Optimal) throw DomainError("extract_candidate: solve is not optimal");
  const Index dim = x.x.dim();
  if (n_tx < 1 || dim % n_tx != 0 || dim / n_tx > n_streams) {
    throw DimensionError("extract_candidate: solution size does not match n_tx / n_streams");
  }
  const EigenDecomposition e = eig_hermitian(x.x);
  const double lmax = e.max_value();
  if (!(lmax > 0.0)) throw DomainError("extract_candidate: degenerate solution (lambda_max <= 0)");
  CandidateSolution c;
  c.f_hat = std::sqrt(lmax) * e.vectors.col(0);
  c.f_mat = ComplexMatrix::Zero(n_tx, n_streams);
  for (Index b = 0; b < dim / n_tx; ++b) c.f_mat.col(b) = c.f_hat.segment(b * n_tx, n_tx);
  const double tr = x.x.trace();
  c.rank1_ratio = tr > 0.0 ? lmax / tr : 0.0;
  return c;
}

/// max over terminals of |gamma - Re(f_hat^H A f_hat)|, per-terminal relative by default.
inline double score_candidate(const CandidateSolution& cand, const JcjProblem& p,
                              ErrorScale scale = ErrorScale::Relative) {
  if (cand.f_hat.size() != p.dim) throw DimensionError("score_candidate: candidate size mismatch");
  double err = 0.0;
  auto visit = [&](const LiftedConstraint& c) {
    const double g_hat = cand.f_hat.dot(c.a.matrix() * cand.f_hat).real();
    double d = std::abs(c.rhs - g_hat);
    if (scale == ErrorScale::Relative) d /= std::abs(c.rhs);
    err = std::max(err, d);
  };
  for (const auto& c : p.a1) visit(c);
  for (const auto& c : p.a2) visit(c);
  return err;
}

/// Optimal value of the relaxation without cyclic-diagonal constraints.
inline double lower_bound_power(const Scenario& s, const JcjOptions& opts = {}) {
  ProblemOptions po = opts.problem;
  if (s.n_ue() == 0) po.reduced = false;
  const JcjProblem p = build_problem(s, std::nullopt, po);
  if (p.a1.empty() && p.a2.empty()) return 0.0;
  const SdpSolution sol = solve(to_sdp_spec(p), opts.solver);
  if (sol.status == SdpStatus::Infeasible) throw InfeasibleProblem("lower_bound_power: relaxation infeasible");
  if (sol.status != SdpStatus::Optimal) {
    throw SolverError(std::string("lower_bound_power: solver returned ") + to_string(sol.status) +
                      (sol.message.empty() ? "" : " (" + sol.message + ")"));
  }
  return sol.primal_obj;
}

/// Jamming-only design (no UEs): full-size relaxation, one beam per UAV block
/// taken from that block's dominant eigenpair.
inline Beamformer run_jamming_only(const Scenario& s, const JcjOptions& opts = {}) {
  if (s.n_ue() != 0) throw DomainError("run_jamming_only: scenario has UEs");
  Beamformer out;
  const int ntx = s.n_tx();
  out.f = ComplexMatrix::Zero(ntx, s.n_uav());
  if (s.n_uav() == 0) return out;
  ProblemOptions po = opts.problem;
  po.reduced = false;
  const JcjProblem p = build_problem(s, std::nullopt, po);
  out.warnings = p.warnings;
  if (p.a2.empty()) return out;
  const SdpSolution sol = solve(to_sdp_spec(p), opts.solver);
  EtaAttempt att{std::nullopt, sol.status, 0.0, 0.0, sol.primal_obj, sol.iterations, sol.message};
  if (sol.status == SdpStatus::Infeasible) throw InfeasibleProblem("run_jamming_only: relaxation infeasible");
  if (sol.status != SdpStatus::Optimal) {
    throw SolverError(std::string("run_jamming_only: solver returned ") + to_string(sol.status));
  }
  // Every constraint sees only S = sum_m X_mm, so any factor S = F F^H with
  // n_uav columns is as good as the lifted point; take the leading eigenpairs.
  ComplexMatrix sum = ComplexMatrix::Zero(ntx, ntx);
  for (int m = 0; m < s.n_uav(); ++m) sum += principal_submatrix(sol.x, m * ntx, (m + 1) * ntx - 1).matrix();
  const EigenDecomposition e = eig_hermitian(HermitianMatrix::symmetrized(sum));
  double top = 0.0;
  for (int m = 0; m < s.n_uav() && m < ntx; ++m) {
    const double lam = e.values[m];
    if (lam <= 0.0) break;
    out.f.col(m) = std::sqrt(lam) * e.vectors.col(m);
    top += lam;
  }
  out.power_mw = out.f.squaredNorm();
  out.relaxation_power_mw = sol.primal_obj;
  const double tr = sol.x.trace();
  out.rank1_ratio = tr > 0.0 ? top / tr : 0.0;
  CandidateSolution c;
  c.f_hat = ComplexVector(p.dim);
  for (int m = 0; m < s.n_uav(); ++m) c.f_hat.segment(m * ntx, ntx) = out.f.col(m);
  att.error = out.error = score_candidate(c, p, opts.error_scale);
  att.rank1_ratio = out.rank1_ratio;
  out.per_eta_errors.push_back(att);
  return out;
}

inline Beamformer run_jcj(const Scenario& s, const EtaSweep& sweep = EtaSweep::standard(),
                          const JcjOptions& opts = {}) {
  if (s.n_ue() == 0) return run_jamming_only(s, opts);
  sweep.validate();

  // Slot 0 is the eta-free relaxation (solved whenever requested so that the
  // lower bound comes for free), slots 1.. follow the sweep order.
  const std::size_t n_slots = sweep.phi.size() + 1;
  std::vector<EtaAttempt> attempts(n_slots);
  std::vector<std::optional<CandidateSolution>> cands(n_slots);
  std::vector<std::string> warnings;

  auto work = [&](std::size_t i) {
    const std::optional<double> eta = i == 0 ? std::nullopt : std::optional<double>(sweep.phi[i - 1]);
    EtaAttempt& att = attempts[i];
    att.eta = eta;
    const JcjProblem p = build_problem(s, eta, opts.problem);
    if (i == 0) warnings = p.warnings;
    SdpSolution sol;
    try {
      sol = solve(to_sdp_spec(p), opts.solver);
    } catch (const Error& e) {
      att.message = e.what();
      return;
    }
    att.status = sol.status;
    att.iterations = sol.iterations;
    att.message = sol.message;
    att.sdp_power_mw = sol.primal_obj;
    if (sol.status != SdpStatus::Optimal) return;
    try {
      CandidateSolution c = extract_candidate(sol, s.n_tx(), s.n_streams());
      c.eta = eta;
      c.error = score_candidate(c, p, opts.error_scale);
      att.error = c.error;
      att.rank1_ratio = c.rank1_ratio;
      cands[i] = std::move(c);
    } catch (const DomainError& e) {
      att.status = SdpStatus::NumericalFailure;
      att.message = e.what();
    }
  };
  parallel_for(n_slots, opts.threads, work);

  Beamformer out;
  out.warnings = std::move(warnings);
  if (attempts[0].status == SdpStatus::Optimal) out.relaxation_power_mw = attempts[0].sdp_power_mw;

  // Lowest error wins; ties resolve to the earlier slot (no eta, then smaller eta).
  double min_err = std::numeric_limits<double>::infinity();
  for (std::size_t i = opts.relaxation_candidate ? 0 : 1; i < n_slots; ++i) {
    if (cands[i]) min_err = std::min(min_err, cands[i]->error);
  }
  double tie = opts.tie_tolerance;
  if (opts.error_scale == ErrorScale::Absolute) {
    const JcjProblem p0 = build_problem(s, std::nullopt, opts.problem);
    double g = std::numeric_limits<double>::infinity();
    for (const auto& c : p0.a1) g = std::min(g, std::abs(c.rhs));
    for (const auto& c : p0.a2) g = std::min(g, std::abs(c.rhs));
    tie *= std::isfinite(g) ? g : 0.0;
  }
  std::optional<std::size_t> best;
  for (std::size_t i = opts.relaxation_candidate ? 0 : 1; i < n_slots && !best; ++i) {
    if (cands[i] && cands[i]->error <= min_err + tie) best = i;
  }
  for (std::size_t i = opts.relaxation_candidate ? 0 : 1; i < n_slots; ++i) {
    out.per_eta_errors.push_back(attempts[i]);
  }
  if (!best) throw EtaSweepFailure("run_jcj: no sweep value produced an optimal solve", out.per_eta_errors);

  const CandidateSolution& c = *cands[*best];
  out.f = c.f_mat;
  out.power_mw = out.f.squaredNorm();
  out.chosen_eta = c.eta;
  out.error = c.error;
  out.rank1_ratio = c.rank1_ratio;
  return out;
}

}  // namespace jcj
