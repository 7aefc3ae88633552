#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "jcj/rng.hpp"
#include "jcj/sdp.hpp"

using namespace jcj;

namespace {

HermitianMatrix diag2(double a, double b) {
  RealVector d(2);
  d << a, b;
  return HermitianMatrix::diagonal(d);
}

void expect_optimal_contract(const SdpSpec& spec, const SdpSolution& s, const SolverOptions& o = {}) {
  ASSERT_EQ(s.status, SdpStatus::Optimal) << s.message;
  EXPECT_TRUE(is_psd(s.x, 1e-7));
  EXPECT_LE(s.gap, o.gap_tol);
  EXPECT_LE(std::abs(s.primal_obj - s.dual_obj), 1e-7 * (1.0 + std::abs(s.primal_obj)));
  for (const auto& c : spec.eq_constraints) {
    EXPECT_LE(std::abs(trace_inner(c.a, s.x) - c.rhs), 1e-7 * (1.0 + std::abs(c.rhs)) * c.a.frobenius_norm());
  }
  for (const auto& c : spec.ineq_constraints) {
    const double v = trace_inner(c.a, s.x);
    const double tol = 1e-7 * (1.0 + std::abs(c.rhs)) * c.a.frobenius_norm();
    if (c.sense == Sense::GreaterEqual) {
      EXPECT_GE(v, c.rhs - tol);
    } else {
      EXPECT_LE(v, c.rhs + tol);
    }
  }
}

}  // namespace

TEST(SdpFixture, TraceEqualsOne) {
  SdpSpec s = SdpSpec::min_trace(2);
  s.eq_constraints.push_back({HermitianMatrix::identity(2), 1.0});
  const SdpSolution r = solve(s);
  expect_optimal_contract(s, r);
  EXPECT_NEAR(r.primal_obj, 1.0, 1e-6);
}

TEST(SdpFixture, WeightedTraceInequality) {
  SdpSpec s = SdpSpec::min_trace(2);
  s.ineq_constraints.push_back({diag2(2.0, 1.0), 2.0, Sense::GreaterEqual});
  const SdpSolution r = solve(s);
  expect_optimal_contract(s, r);
  EXPECT_NEAR(r.primal_obj, 1.0, 1e-6);
  EXPECT_LE((r.x.matrix() - diag2(1.0, 0.0).matrix()).norm(), 1e-6);
}

TEST(SdpFixture, NegativeDefiniteInfeasible) {
  SdpSpec s = SdpSpec::min_trace(2);
  s.ineq_constraints.push_back({diag2(-1.0, -1.0), 1.0, Sense::GreaterEqual});
  const SdpSolution r = solve(s);
  ASSERT_EQ(r.status, SdpStatus::Infeasible) << r.message;
  // Farkas ray: y >= 0 for a >= row, b^T y = 1, sum y_i A_i <= 0.
  ASSERT_EQ(r.certificate.size(), 1);
  EXPECT_GE(r.certificate[0], 0.0);
  EXPECT_NEAR(r.certificate[0] * 1.0, 1.0, 1e-9);
  const HermitianMatrix agg = r.certificate[0] * diag2(-1.0, -1.0);
  EXPECT_LE(eigenvalues_hermitian(agg)[0], 1e-8);
}

TEST(SdpSolver, InfeasibleEqualityPair) {
  // tr(X) = 1 and tr(X) = 2 together.
  SdpSpec s = SdpSpec::min_trace(3);
  s.eq_constraints.push_back({HermitianMatrix::identity(3), 1.0});
  s.eq_constraints.push_back({HermitianMatrix::identity(3), 2.0});
  const SdpSolution r = solve(s);
  EXPECT_NE(r.status, SdpStatus::Optimal);
}

TEST(SdpSolver, ZeroMatrixRows) {
  SdpSpec s = SdpSpec::min_trace(2);
  s.eq_constraints.push_back({HermitianMatrix::identity(2), 1.0});
  s.eq_constraints.push_back({HermitianMatrix::zero(2), 0.0});
  EXPECT_EQ(solve(s).status, SdpStatus::Optimal);
  s.eq_constraints.back().rhs = 1.0;
  EXPECT_EQ(solve(s).status, SdpStatus::Infeasible);
}

TEST(SdpSolver, LessEqualSense) {
  // min -tr(diag(1,2) X) s.t. tr(X) <= 3 -> -6 at X = diag(0, 3).
  SdpSpec s;
  s.dim = 2;
  s.objective = -1.0 * diag2(1.0, 2.0);
  s.ineq_constraints.push_back({HermitianMatrix::identity(2), 3.0, Sense::LessEqual});
  const SdpSolution r = solve(s);
  expect_optimal_contract(s, r);
  EXPECT_NEAR(r.primal_obj, -6.0, 1e-6);
  EXPECT_NEAR(r.slack[0], 0.0, 1e-6);  // active
}

TEST(SdpSolver, ComplexOffDiagonalConstraint) {
  // min tr(X) s.t. Re tr(A X) = 1 with A = [[0, i], [-i, 0]]: value 1 (lambda_max(A) = 1).
  ComplexMatrix a(2, 2);
  a << 0.0, cplx(0.0, 1.0), cplx(0.0, -1.0), 0.0;
  SdpSpec s = SdpSpec::min_trace(2);
  s.eq_constraints.push_back({HermitianMatrix(a), 1.0});
  const SdpSolution r = solve(s);
  expect_optimal_contract(s, r);
  EXPECT_NEAR(r.primal_obj, 1.0, 1e-6);
}

TEST(SdpSolver, RandomMinTraceMatchesEigenBound) {
  // min tr(X) s.t. tr(A X) >= b with single PSD-indefinite A: value b / lambda_max(A).
  CounterRng rng(21);
  for (int t = 0; t < 20; ++t) {
    const Index n = 2 + static_cast<Index>(rng.uniform01() * 8);
    ComplexMatrix g(n, n);
    for (Index i = 0; i < n * n; ++i) g.data()[i] = cplx(rng.normal(), rng.normal());
    const HermitianMatrix a = HermitianMatrix::symmetrized(g + g.adjoint());
    const double b = 0.5 + rng.uniform01();
    SdpSpec s = SdpSpec::min_trace(n);
    s.ineq_constraints.push_back({a, b, Sense::GreaterEqual});
    const SdpSolution r = solve(s);
    const double lmax = eigenvalues_hermitian(a)[0];
    if (lmax <= 0.0) {  // tr(A X) <= 0 for every PSD X
      EXPECT_EQ(r.status, SdpStatus::Infeasible);
      continue;
    }
    expect_optimal_contract(s, r);
    EXPECT_NEAR(r.primal_obj, b / lmax, 1e-6 * b / lmax);
  }
}

TEST(SdpSolver, WeakDualityOnEveryIterate) {
  CounterRng rng(22);
  const Index n = 6;
  SdpSpec s = SdpSpec::min_trace(n);
  for (int i = 0; i < 4; ++i) {
    ComplexVector v(n);
    for (Index k = 0; k < n; ++k) v[k] = cplx(rng.normal(), rng.normal());
    s.eq_constraints.push_back({HermitianMatrix::outer(v), 1.0 + i});
  }
  const SdpSolution r = solve(s);
  expect_optimal_contract(s, r);
  ASSERT_FALSE(r.trace.empty());
  // Iterates are infeasible-start; weak duality is asserted at termination and on
  // iterates whose residuals are already at tolerance.
  for (const auto& it : r.trace) {
    if (it.primal_res <= 1e-8 && it.dual_res <= 1e-8) {
      EXPECT_LE(it.dual_obj, it.primal_obj + 1e-9 * (1.0 + std::abs(it.primal_obj)));
    }
  }
  EXPECT_LE(r.dual_obj, r.primal_obj + 1e-9 * (1.0 + std::abs(r.primal_obj)));
}

TEST(SdpSolver, BitwiseReproducible) {
  CounterRng rng(23);
  const Index n = 5;
  SdpSpec s = SdpSpec::min_trace(n);
  for (int i = 0; i < 3; ++i) {
    ComplexVector v(n);
    for (Index k = 0; k < n; ++k) v[k] = cplx(rng.normal(), rng.normal());
    s.ineq_constraints.push_back({HermitianMatrix::outer(v), 1.0, Sense::GreaterEqual});
  }
  const SdpSolution a = solve(s);
  const SdpSolution b = solve(s);
  EXPECT_EQ(a.iterations, b.iterations);
  EXPECT_EQ(a.primal_obj, b.primal_obj);
  EXPECT_EQ(a.x.matrix(), b.x.matrix());
}

TEST(SdpSolver, IterationCapAndLog) {
  SdpSpec s = SdpSpec::min_trace(2);
  s.ineq_constraints.push_back({diag2(2.0, 1.0), 2.0, Sense::GreaterEqual});
  SolverOptions o;
  o.max_iter = 1;
  std::ostringstream log;
  o.verbose = true;
  o.log = &log;
  const SdpSolution r = solve(s, o);
  EXPECT_EQ(r.status, SdpStatus::MaxIter);
  EXPECT_NE(log.str().find("iter"), std::string::npos);
}

TEST(SdpSolver, RejectsBadSpecs) {
  SdpSpec s = SdpSpec::min_trace(2);
  EXPECT_THROW(solve(s), DomainError);
  s.eq_constraints.push_back({HermitianMatrix::identity(3), 1.0});
  EXPECT_THROW(solve(s), DimensionError);
}
