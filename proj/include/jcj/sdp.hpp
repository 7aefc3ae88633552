#pragma once

// Primal-dual path-following interior-point solver for complex Hermitian SDPs
//
//   minimize    Re tr(C X)
//   subject to  Re tr(A_i X)  = b_i          (equalities)
//               Re tr(A_j X) >= b_j / <= b_j (inequalities, via slacks)
//               X Hermitian PSD
//
// HKM search direction with Mehrotra predictor-corrector, infeasible start,
// dense Schur complement solved by Cholesky.  Rows are scaled to unit Frobenius
// norm and X is rescaled so the data are O(1); all tolerances apply to the
// scaled problem.  Primal infeasibility is reported only with a verified
// Farkas ray y: sum_i y_i A_i <= 0, b^T y = 1, slack-sign conditions.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "jcj/errors.hpp"
#include "jcj/hermitian.hpp"

namespace jcj {

enum class SdpStatus { Optimal, Infeasible, MaxIter, NumericalFailure };

inline const char* to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::Optimal: return "optimal";
    case SdpStatus::Infeasible: return "infeasible";
    case SdpStatus::MaxIter: return "max_iter";
    case SdpStatus::NumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

enum class Sense { GreaterEqual, LessEqual };

struct EqConstraint {
  HermitianMatrix a;
  double rhs = 0.0;
};

struct IneqConstraint {
  HermitianMatrix a;
  double rhs = 0.0;
  Sense sense = Sense::GreaterEqual;
};

struct SdpSpec {
  Index dim = 0;
  HermitianMatrix objective;
  std::vector<EqConstraint> eq_constraints;
  std::vector<IneqConstraint> ineq_constraints;

  /// min tr(X) over dim x dim Hermitian PSD matrices.
  static SdpSpec min_trace(Index dim) {
    SdpSpec s;
    s.dim = dim;
    s.objective = HermitianMatrix::identity(dim);
    return s;
  }
};

struct SolverOptions {
  double feas_tol = 1e-8;
  double gap_tol = 1e-8;
  int max_iter = 200;
  double step_fraction = 0.98;
  bool verbose = false;
  std::ostream* log = nullptr;  // receives the iteration log when verbose
};

struct IterationRecord {
  int iter = 0;
  double primal_obj = 0.0;
  double dual_obj = 0.0;
  double gap = 0.0;  // |p - d| / (1 + |p|), scaled problem
  double primal_res = 0.0;
  double dual_res = 0.0;
  double mu = 0.0;
  double step_primal = 0.0;
  double step_dual = 0.0;
};

struct SdpSolution {
  SdpStatus status = SdpStatus::NumericalFailure;
  HermitianMatrix x;      // primal matrix, original units
  HermitianMatrix z;      // dual slack matrix C - sum y_i A_i, original units
  RealVector y;           // multipliers: equalities first, then inequalities
  RealVector slack;       // inequality slacks s_j >= 0, original units
  double primal_obj = 0.0;  // Re tr(C X), original units
  double dual_obj = 0.0;    // b^T y, original units
  double primal_residual = 0.0;  // ||b - A(X)|| / (1 + ||b||), scaled rows
  double dual_residual = 0.0;    // ||C - A^T y - Z|| / (1 + ||C||), scaled
  double gap = 0.0;              // |p - d| / (1 + |p|), scaled
  int iterations = 0;
  RealVector certificate;  // Farkas ray (original row units) when Infeasible
  std::vector<IterationRecord> trace;
  std::string message;
};

namespace detail {

inline double psd_max_step(const Eigen::LLT<ComplexMatrix>& chol, const ComplexMatrix& d) {
  // Largest a with L L^H + a D >= 0 is -1 / lambda_min(L^{-1} D L^{-H}).
  const auto& l = chol.matrixL();
  ComplexMatrix t = l.solve(d);
  ComplexMatrix s = l.solve(t.adjoint().eval());
  s = 0.5 * (s + s.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(s, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) return 0.0;
  const double lmin = es.eigenvalues()[0];
  return lmin >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / lmin;
}

inline double lp_max_step(const RealVector& x, const RealVector& dx) {
  double a = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < x.size(); ++i) {
    if (dx[i] < 0.0) a = std::min(a, -x[i] / dx[i]);
  }
  return a;
}

inline double re_inner(const ComplexMatrix& a, const ComplexMatrix& b) {
  // Re tr(A^H B)
  return (a.conjugate().cwiseProduct(b)).sum().real();
}

inline ComplexMatrix herm(const ComplexMatrix& m) { return 0.5 * (m + m.adjoint()); }

}  // namespace detail

inline SdpSolution solve(const SdpSpec& spec, const SolverOptions& opts = {}) {
  const Index n = spec.dim;
  if (n < 1) throw DomainError("sdp solve: dim must be >= 1");
  if (spec.objective.dim() != n) throw DimensionError("sdp solve: objective dimension mismatch");
  const Index neq = static_cast<Index>(spec.eq_constraints.size());
  const Index nin = static_cast<Index>(spec.ineq_constraints.size());
  if (neq + nin == 0) throw DomainError("sdp solve: at least one constraint is required");

  SdpSolution sol;
  sol.y = RealVector::Zero(neq + nin);
  sol.slack = RealVector::Zero(nin);

  // Collect rows, drop structurally empty ones, detect trivially infeasible ones.
  struct Row {
    const HermitianMatrix* a;
    double rhs;
    double slack_coef;  // 0 for equality, -1 for >=, +1 for <=
    Index original;
  };
  std::vector<Row> rows;
  for (Index i = 0; i < neq + nin; ++i) {
    const bool is_eq = i < neq;
    const HermitianMatrix& a = is_eq ? spec.eq_constraints[i].a : spec.ineq_constraints[i - neq].a;
    const double b = is_eq ? spec.eq_constraints[i].rhs : spec.ineq_constraints[i - neq].rhs;
    if (a.dim() != n) throw DimensionError("sdp solve: constraint dimension mismatch");
    if (!std::isfinite(b)) throw DomainError("sdp solve: non-finite right-hand side");
    const double coef = is_eq ? 0.0
                        : spec.ineq_constraints[i - neq].sense == Sense::GreaterEqual ? -1.0
                                                                                      : 1.0;
    if (a.frobenius_norm() == 0.0) {
      // 0 (==, >=, <=) b
      const bool ok = is_eq ? b == 0.0 : (coef < 0.0 ? b <= 0.0 : b >= 0.0);
      if (!ok) {
        sol.status = SdpStatus::Infeasible;
        sol.certificate = RealVector::Zero(neq + nin);
        sol.certificate[i] = 1.0 / b;
        sol.message = "constraint " + std::to_string(i) + " has a zero matrix and unattainable rhs";
        sol.x = HermitianMatrix::zero(n);
        sol.z = HermitianMatrix::zero(n);
        return sol;
      }
      continue;
    }
    rows.push_back({&a, b, coef, i});
  }

  const Index m = static_cast<Index>(rows.size());
  const Index n2 = n * n;

  // Scaled data.
  const double c_norm = spec.objective.frobenius_norm() > 0.0 ? spec.objective.frobenius_norm() : 1.0;
  const ComplexMatrix c = spec.objective.matrix() / c_norm;
  RealVector row_norm(m), b(m), slack_coef(m);
  std::vector<ComplexMatrix> a(m);
  ComplexMatrix avec(n2, m);
  for (Index i = 0; i < m; ++i) {
    row_norm[i] = rows[i].a->frobenius_norm();
    a[i] = rows[i].a->matrix() / row_norm[i];
    avec.col(i) = Eigen::Map<const ComplexVector>(a[i].data(), n2);
    b[i] = rows[i].rhs / row_norm[i];
    slack_coef[i] = rows[i].slack_coef;
  }
  const double b_max = m ? b.cwiseAbs().maxCoeff() : 0.0;
  const double x_scale = b_max > 0.0 ? b_max : 1.0;
  b /= x_scale;

  std::vector<Index> lp_rows;
  for (Index i = 0; i < m; ++i) {
    if (slack_coef[i] != 0.0) lp_rows.push_back(i);
  }
  const Index nlp = static_cast<Index>(lp_rows.size());

  auto op_a = [&](const ComplexMatrix& x) -> RealVector {
    const Eigen::Map<const ComplexVector> xv(x.data(), n2);
    return (avec.adjoint() * xv).real();
  };
  auto op_at = [&](const RealVector& y) -> ComplexMatrix {
    ComplexVector v = avec * y.cast<cplx>();
    return detail::herm(Eigen::Map<ComplexMatrix>(v.data(), n, n));
  };
  auto slack_contrib = [&](const RealVector& xs) {  // a_s * x_s per row
    RealVector r = RealVector::Zero(m);
    for (Index j = 0; j < nlp; ++j) r[lp_rows[j]] = slack_coef[lp_rows[j]] * xs[j];
    return r;
  };
  auto slack_transpose = [&](const RealVector& y) {  // a_s^T y per slack
    RealVector r(nlp);
    for (Index j = 0; j < nlp; ++j) r[j] = slack_coef[lp_rows[j]] * y[lp_rows[j]];
    return r;
  };

  const double b_norm = b.norm();
  const double c_fro = c.norm();
  const double total_dim = static_cast<double>(n + nlp);

  // Starting point.
  double xi = std::max({10.0, std::sqrt(static_cast<double>(n)),
                        static_cast<double>(n) * (1.0 + (m ? b.cwiseAbs().maxCoeff() : 0.0)) / 2.0});
  double zeta = std::max({10.0, std::sqrt(static_cast<double>(n)), c_fro});
  ComplexMatrix x = xi * ComplexMatrix::Identity(n, n);
  ComplexMatrix z = zeta * ComplexMatrix::Identity(n, n);
  RealVector xs = RealVector::Constant(nlp, xi);
  RealVector zs = RealVector::Constant(nlp, zeta);
  RealVector y = RealVector::Zero(m);

  auto unscale = [&](SdpStatus st) {
    sol.status = st;
    sol.x = HermitianMatrix::symmetrized(x * x_scale);
    sol.z = HermitianMatrix::symmetrized(z * c_norm);
    sol.primal_obj = detail::re_inner(c, x) * c_norm * x_scale;
    sol.dual_obj = b.dot(y) * c_norm * x_scale;
    for (Index i = 0; i < m; ++i) {
      sol.y[rows[i].original] = y[i] * c_norm / row_norm[i];
    }
    for (Index j = 0; j < nlp; ++j) {
      const Index r = lp_rows[j];
      sol.slack[rows[r].original - neq] = xs[j] * x_scale * row_norm[r];
    }
  };

  auto log_line = [&](const IterationRecord& r) {
    if (!opts.verbose || !opts.log) return;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%4d %+.10e %+.10e %.3e %.3e %.3e %.3e %.3f %.3f\n", r.iter,
                  r.primal_obj, r.dual_obj, r.gap, r.primal_res, r.dual_res, r.mu, r.step_primal,
                  r.step_dual);
    *opts.log << buf;
  };
  if (opts.verbose && opts.log) {
    *opts.log << "iter primal dual gap pres dres mu step_p step_d\n";
  }

  double step_p = 0.0, step_d = 0.0;
  int stalled = 0;
  for (int iter = 0;; ++iter) {
    const RealVector rp = b - op_a(x) - slack_contrib(xs);
    const ComplexMatrix rd = detail::herm(c - op_at(y) - z);
    const RealVector rds = -slack_transpose(y) - zs;
    const double mu = (detail::re_inner(x, z) + xs.dot(zs)) / total_dim;
    const double pobj = detail::re_inner(c, x);
    const double dobj = b.dot(y);
    const double pres = rp.norm() / (1.0 + b_norm);
    const double dres = std::sqrt(rd.squaredNorm() + rds.squaredNorm()) / (1.0 + c_fro);
    const double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj));

    IterationRecord rec{iter, pobj * c_norm * x_scale, dobj * c_norm * x_scale, gap, pres, dres, mu,
                        step_p, step_d};
    sol.trace.push_back(rec);
    log_line(rec);
    sol.iterations = iter;
    sol.primal_residual = pres;
    sol.dual_residual = dres;
    sol.gap = gap;

    if (pres <= opts.feas_tol && dres <= opts.feas_tol && gap <= opts.gap_tol) {
      unscale(SdpStatus::Optimal);
      return sol;
    }

    // Farkas ray check: y / (b^T y) with sum y_i A_i <= 0 and slack signs.
    if (dobj > 0.0) {
      const RealVector ray = y / dobj;
      bool signs_ok = true;
      for (Index j = 0; j < nlp; ++j) {
        // z_s = -a_s^T y >= 0
        if (-slack_coef[lp_rows[j]] * ray[lp_rows[j]] < -opts.feas_tol) signs_ok = false;
      }
      if (signs_ok) {
        const ComplexMatrix s = op_at(ray);
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(s, Eigen::EigenvaluesOnly);
        if (es.info() == Eigen::Success && es.eigenvalues()[n - 1] <= opts.feas_tol) {
          unscale(SdpStatus::Infeasible);
          sol.certificate = RealVector::Zero(neq + nin);
          for (Index i = 0; i < m; ++i) {
            sol.certificate[rows[i].original] = ray[i] / (row_norm[i] * x_scale);
          }
          sol.message = "primal infeasible: dual improving ray found";
          return sol;
        }
      }
    }

    if (iter >= opts.max_iter) {
      unscale(SdpStatus::MaxIter);
      sol.message = "iteration limit reached";
      return sol;
    }

    // Factorizations.
    Eigen::LLT<ComplexMatrix> chol_z(z);
    Eigen::LLT<ComplexMatrix> chol_x(x);
    if (chol_z.info() != Eigen::Success || chol_x.info() != Eigen::Success) {
      unscale(SdpStatus::NumericalFailure);
      sol.message = "iterate lost positive definiteness";
      return sol;
    }
    const ComplexMatrix w = detail::herm(chol_z.solve(ComplexMatrix::Identity(n, n)));

    // G_j = X A_j W, Schur complement M_ij = Re tr(A_i G_j) + slack terms.
    ComplexMatrix gvec(n2, m);
    for (Index j = 0; j < m; ++j) {
      ComplexMatrix g = x * a[j] * w;
      gvec.col(j) = Eigen::Map<const ComplexVector>(g.data(), n2);
    }
    RealMatrix schur = (avec.adjoint() * gvec).real();
    schur = 0.5 * (schur + schur.transpose()).eval();
    for (Index j = 0; j < nlp; ++j) schur(lp_rows[j], lp_rows[j]) += xs[j] / zs[j];

    Eigen::LLT<RealMatrix> chol_m(schur);
    Eigen::LDLT<RealMatrix> ldlt_m;
    const bool use_llt = chol_m.info() == Eigen::Success;
    if (!use_llt) {
      ldlt_m.compute(schur);
      if (ldlt_m.info() != Eigen::Success) {
        unscale(SdpStatus::NumericalFailure);
        sol.message = "Schur complement factorization failed";
        return sol;
      }
    }
    auto schur_solve = [&](const RealVector& rhs) -> RealVector {
      return use_llt ? RealVector(chol_m.solve(rhs)) : RealVector(ldlt_m.solve(rhs));
    };

    const ComplexMatrix xrdw = x * rd * w;
    // Direction for target sigma*mu and second-order correction terms.
    auto direction = [&](double target, const ComplexMatrix* corr, const RealVector* corr_s,
                         ComplexMatrix& dx, RealVector& dy, ComplexMatrix& dz, RealVector& dxs,
                         RealVector& dzs) -> bool {
      ComplexMatrix k = target * w - x - xrdw;
      if (corr) k -= (*corr) * w;
      RealVector ks(nlp);
      for (Index j = 0; j < nlp; ++j) {
        ks[j] = target / zs[j] - xs[j] - xs[j] * rds[j] / zs[j];
        if (corr_s) ks[j] -= (*corr_s)[j] / zs[j];
      }
      const RealVector h = rp - op_a(k) - slack_contrib(ks);
      dy = schur_solve(h);
      if (!dy.allFinite()) return false;
      const ComplexVector gdy = gvec * dy.cast<cplx>();
      dx = detail::herm(k + Eigen::Map<const ComplexMatrix>(gdy.data(), n, n));
      dz = detail::herm(rd - op_at(dy));
      dzs = rds - slack_transpose(dy);
      dxs.resize(nlp);
      for (Index j = 0; j < nlp; ++j) dxs[j] = ks[j] + xs[j] * slack_coef[lp_rows[j]] * dy[lp_rows[j]] / zs[j];
      return dx.allFinite() && dz.allFinite();
    };

    ComplexMatrix dx, dz;
    RealVector dy, dxs, dzs;
    if (!direction(0.0, nullptr, nullptr, dx, dy, dz, dxs, dzs)) {
      unscale(SdpStatus::NumericalFailure);
      sol.message = "predictor direction is not finite";
      return sol;
    }
    const double ap_aff = std::min(1.0, std::min(detail::psd_max_step(chol_x, dx), detail::lp_max_step(xs, dxs)));
    const double ad_aff = std::min(1.0, std::min(detail::psd_max_step(chol_z, dz), detail::lp_max_step(zs, dzs)));
    const double mu_aff =
        (detail::re_inner(x + ap_aff * dx, z + ad_aff * dz) + (xs + ap_aff * dxs).dot(zs + ad_aff * dzs)) /
        total_dim;
    double sigma = std::pow(std::max(0.0, mu_aff) / mu, 3.0);
    sigma = std::clamp(sigma, 0.0, 1.0);

    const ComplexMatrix corr = dx * dz;
    const RealVector corr_s = dxs.cwiseProduct(dzs);
    if (!direction(sigma * mu, &corr, &corr_s, dx, dy, dz, dxs, dzs)) {
      unscale(SdpStatus::NumericalFailure);
      sol.message = "corrector direction is not finite";
      return sol;
    }
    const double ap_max = std::min(detail::psd_max_step(chol_x, dx), detail::lp_max_step(xs, dxs));
    const double ad_max = std::min(detail::psd_max_step(chol_z, dz), detail::lp_max_step(zs, dzs));
    step_p = std::min(1.0, opts.step_fraction * ap_max);
    step_d = std::min(1.0, opts.step_fraction * ad_max);

    // Rounding can push a near-singular iterate off the cone; halve until it factors.
    auto backtrack = [](const ComplexMatrix& base, const ComplexMatrix& d, double& step) {
      ComplexMatrix next = detail::herm(base + step * d);
      for (int t = 0; t < 20 && Eigen::LLT<ComplexMatrix>(next).info() != Eigen::Success; ++t) {
        step *= 0.5;
        next = detail::herm(base + step * d);
      }
      return next;
    };
    x = backtrack(x, dx, step_p);
    xs += step_p * dxs;
    y += step_d * dy;
    z = backtrack(z, dz, step_d);
    zs += step_d * dzs;

    if (step_p < 1e-10 && step_d < 1e-10) {
      if (++stalled >= 3) {
        unscale(SdpStatus::NumericalFailure);
        sol.message = "step lengths collapsed";
        return sol;
      }
    } else {
      stalled = 0;
    }
  }
}

}  // namespace jcj
