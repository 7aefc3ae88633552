#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <limits>

#include "jcj/jcj.hpp"
#include "jcj/metrics.hpp"
#include "jcj/properties.hpp"

using namespace jcj;

namespace {

Scenario sampled(int n_ue, int n_uav, int n_tx, std::uint64_t seed) {
  ScenarioConfig c;
  c.n_ue = n_ue;
  c.n_uav = n_uav;
  c.n_tx = n_tx;
  return sample_scenario(c, CounterRng::for_stream(seed, 0)());
}

SdpSolution optimal_with(const HermitianMatrix& x) {
  SdpSolution s;
  s.status = SdpStatus::Optimal;
  s.x = x;
  return s;
}

// Closed-form single-user optimum sigma^2 (2^R - 1) / ||h||^2.
double mrt_power(const Scenario& s) {
  return s.ues[0].noise_power_mw * (std::exp2(s.r_th[0]) - 1.0) / s.h_ue.col(0).squaredNorm();
}

}  // namespace

TEST(ExtractCandidate, RankOneRecoversVectorUpToPhase) {
  CounterRng rng(1);
  const ComplexVector f = random_complex_vector(rng, 6);
  const CandidateSolution c = extract_candidate(optimal_with(HermitianMatrix::outer(f)), 3, 2);
  const cplx phase = c.f_hat.dot(f) / std::abs(c.f_hat.dot(f));
  EXPECT_LE((c.f_hat * phase - f).norm(), 1e-10 * f.norm());
  EXPECT_NEAR(c.rank1_ratio, 1.0, 1e-12);
  EXPECT_EQ(c.f_mat.rows(), 3);
  EXPECT_EQ(c.f_mat.cols(), 2);
  for (Index b = 0; b < 2; ++b) EXPECT_EQ(c.f_mat.col(b), c.f_hat.segment(3 * b, 3));
}

TEST(ExtractCandidate, DominantEigenpairScaling) {
  RealVector d(2);
  d << 2.0, 1.0;
  const CandidateSolution c = extract_candidate(optimal_with(HermitianMatrix::diagonal(d)), 1, 2);
  EXPECT_NEAR(std::abs(c.f_hat[0]), std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(std::abs(c.f_hat[1]), 0.0, 1e-14);
  EXPECT_NEAR(c.rank1_ratio, 2.0 / 3.0, 1e-14);
}

TEST(ExtractCandidate, ReducedSolutionIsZeroPadded) {
  CounterRng rng(2);
  const ComplexVector f = random_complex_vector(rng, 4);
  const CandidateSolution c = extract_candidate(optimal_with(HermitianMatrix::outer(f)), 4, 3);
  EXPECT_EQ(c.f_mat.cols(), 3);
  EXPECT_EQ(c.f_mat.col(1).norm(), 0.0);
  EXPECT_EQ(c.f_mat.col(2).norm(), 0.0);
}

TEST(ExtractCandidate, Errors) {
  EXPECT_THROW(extract_candidate(optimal_with(HermitianMatrix::zero(2)), 1, 2), DomainError);
  SdpSolution s = optimal_with(HermitianMatrix::identity(2));
  s.status = SdpStatus::MaxIter;
  EXPECT_THROW(extract_candidate(s, 1, 2), DomainError);
  EXPECT_THROW(extract_candidate(optimal_with(HermitianMatrix::identity(3)), 2, 2), DimensionError);
}

TEST(ScoreCandidate, ZeroCandidateAndPhaseInvariance) {
  const Scenario s = sampled(2, 2, 4, 3);
  const JcjProblem p = build_problem(s, std::nullopt);
  CandidateSolution zero;
  zero.f_hat = ComplexVector::Zero(p.dim);
  EXPECT_DOUBLE_EQ(score_candidate(zero, p, ErrorScale::Relative), 1.0);
  double want = 0.0;
  for (const auto& c : p.a1) want = std::max(want, c.rhs);
  for (const auto& c : p.a2) want = std::max(want, std::abs(c.rhs));
  EXPECT_DOUBLE_EQ(score_candidate(zero, p, ErrorScale::Absolute), want);

  CounterRng rng(4);
  CandidateSolution c;
  c.f_hat = 1e-4 * random_complex_vector(rng, p.dim);
  const double e0 = score_candidate(c, p);
  c.f_hat *= std::polar(1.0, 1.234);
  EXPECT_NEAR(score_candidate(c, p), e0, 1e-12 * e0);
}

TEST(ScoreCandidate, ExactSolutionScoresZero) {
  // Single user: the MRT vector meets the only constraint exactly.
  const Scenario s = sampled(1, 0, 8, 5);
  const JcjProblem p = build_problem(s, std::nullopt);
  CandidateSolution c;
  const ComplexVector h = s.h_ue.col(0);
  c.f_hat = std::sqrt(mrt_power(s)) * h / h.norm();
  EXPECT_LE(score_candidate(c, p), 1e-12);
}

TEST(ToSdpSpec, CyclicShiftsDeduplicated) {
  const Scenario s = sampled(2, 1, 4, 6);
  const JcjProblem p = build_problem(s, 0.2);
  ASSERT_EQ(p.a3.size(), 7u);
  const SdpSpec spec = to_sdp_spec(p);
  EXPECT_EQ(spec.eq_constraints.size(), 3u);
  EXPECT_EQ(spec.ineq_constraints.size(), 4u);  // k = 1..4 of K = 8
}

TEST(ToSdpSpec, DroppedShiftsAreRedundant) {
  // Solutions satisfy the k > K/2 rows too.
  const Scenario s = sampled(1, 1, 5, 7);
  const JcjProblem p = build_problem(s, 0.3);
  const SdpSolution sol = solve(to_sdp_spec(p));
  ASSERT_EQ(sol.status, SdpStatus::Optimal);
  for (const auto& c : p.a3) {
    EXPECT_GE(trace_inner(c.a, sol.x), -1e-7 * sol.x.trace()) << "k=" << c.terminal;
  }
}

TEST(RunJcj, SingleUserClosedForm) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Scenario s = sampled(1, 0, 16, seed);
    const Beamformer b = run_jcj(s);
    const double want = mrt_power(s);
    EXPECT_NEAR(b.power_mw, want, 0.01 * want);
    EXPECT_NEAR(lower_bound_power(s), want, 1e-6 * want);
  }
}

TEST(RunJcj, OutputInvariants) {
  int exact = 0;
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const Scenario s = sampled(2, 2, 16, 100 + seed);
    const Beamformer b = run_jcj(s);
    EXPECT_EQ(b.f.rows(), 16);
    EXPECT_EQ(b.f.cols(), 4);
    EXPECT_NEAR(b.power_mw, b.f.squaredNorm(), 1e-9 * b.power_mw);
    EXPECT_EQ(b.f.col(2).norm(), 0.0);
    EXPECT_EQ(b.f.col(3).norm(), 0.0);
    EXPECT_EQ(b.per_eta_errors.size(), 15u);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& a : b.per_eta_errors) {
      if (a.status != SdpStatus::Optimal) continue;
      best = std::min(best, a.error);
      if (b.relaxation_power_mw) EXPECT_GE(a.sdp_power_mw, *b.relaxation_power_mw * (1.0 - 1e-7));
    }
    EXPECT_LE(b.error, best + 1e-6);  // argmin up to the tie tolerance
    if (b.error <= 1e-7) {
      ++exact;
      // An exactly feasible beamformer cannot undercut the relaxation.
      ASSERT_TRUE(b.relaxation_power_mw);
      EXPECT_GE(b.power_mw, *b.relaxation_power_mw * (1.0 - 1e-6));
      const LinkErrors e = link_errors(s, b.f);
      EXPECT_LE(e.rate_error, 1e-5);
      EXPECT_LE(e.sinr_error, 1e-5);
    }
  }
  EXPECT_GE(exact, 1);
}

TEST(RunJcj, TieBreakTowardEarliestSlot) {
  const Scenario s = sampled(2, 1, 4, 8);
  JcjOptions o;
  o.tie_tolerance = 1e9;  // every candidate ties
  EXPECT_FALSE(run_jcj(s, EtaSweep::standard(), o).chosen_eta.has_value());
  o.relaxation_candidate = false;
  const Beamformer b = run_jcj(s, EtaSweep::standard(), o);
  ASSERT_TRUE(b.chosen_eta.has_value());
  EXPECT_EQ(*b.chosen_eta, 0.01);
  EXPECT_EQ(b.per_eta_errors.size(), 14u);
}

TEST(RunJcj, ThreadCountDoesNotChangeResult) {
  const Scenario s = sampled(2, 2, 6, 9);
  JcjOptions a, b;
  a.threads = 1;
  b.threads = 3;
  const Beamformer x = run_jcj(s, EtaSweep::standard(), a);
  const Beamformer y = run_jcj(s, EtaSweep::standard(), b);
  EXPECT_EQ(x.f, y.f);
  EXPECT_EQ(x.chosen_eta, y.chosen_eta);
}

TEST(RunJcj, AllSweepValuesFail) {
  // UE and UAV share one channel: the two equalities pin |h^H f|^2 to different values.
  const auto g = ArrayGeometry::half_wavelength(4, 6e9);
  Terminal t;
  t.range_m = 60.0;
  t.aod_deg = 10.0;
  t.noise_power_mw = dbm_to_mw(-101.0);
  Terminal u = t;
  u.kind = TerminalKind::UAV;
  u.eaves_power_mw = dbm_to_mw(-81.0);
  const Scenario s = make_scenario(g, {t}, {u}, {7.0}, {13.0});
  try {
    run_jcj(s);
    FAIL() << "expected EtaSweepFailure";
  } catch (const EtaSweepFailure& e) {
    EXPECT_EQ(e.attempts().size(), 15u);
    for (const auto& a : e.attempts()) EXPECT_NE(a.status, SdpStatus::Optimal);
  }
}

TEST(RunJcj, RejectsBadSweep) {
  const Scenario s = sampled(1, 1, 4, 10);
  EXPECT_THROW(run_jcj(s, EtaSweep{{}}), DomainError);
  EXPECT_THROW(run_jcj(s, EtaSweep{{0.5, 0.2}}), DomainError);
  EXPECT_THROW(run_jcj(s, EtaSweep{{1.0}}), DomainError);
}

TEST(JammingOnly, SingleUavClosedForm) {
  const Scenario s = sampled(0, 1, 8, 11);
  const Beamformer b = run_jcj(s);
  const double g = uav_rhs(s.uavs[0].eaves_power_mw, s.gamma_th_db[0], s.uavs[0].noise_power_mw);
  const double want = g / s.h_uav.col(0).squaredNorm();
  EXPECT_NEAR(b.power_mw, want, 1e-6 * want);
  EXPECT_NEAR(uav_sinr_db(s.h_uav.col(0), b.f, s.uavs[0].eaves_power_mw, s.uavs[0].noise_power_mw), 13.0, 1e-5);
}

TEST(JammingOnly, FourUavsFourBeams) {
  const Scenario s = sampled(0, 4, 16, 12);
  const Beamformer b = run_jcj(s);
  ASSERT_EQ(b.f.cols(), 4);
  // The factorization of the summed block is exact, so the relaxation is attained.
  EXPECT_NEAR(b.power_mw, *b.relaxation_power_mw, 1e-6 * b.power_mw);
  const LinkErrors e = link_errors(s, b.f);
  EXPECT_LE(e.sinr_error, 1e-5);
}

TEST(JammingOnly, EmptyScenario) {
  const Scenario s = sampled(0, 0, 4, 13);
  const Beamformer b = run_jcj(s);
  EXPECT_EQ(b.power_mw, 0.0);
  EXPECT_EQ(b.f.cols(), 0);
  EXPECT_EQ(lower_bound_power(s), 0.0);
}

TEST(RelaxationStructure, BlockDiagonalAndZeroJammingBlock) {
  ScenarioConfig c;
  c.n_tx = 4;
  c.n_ue = 2;
  c.n_uav = 1;
  int rank_gt_one = 0;
  for (int i = 0; i < 10; ++i) {
    const Scenario s = sample_scenario(c, CounterRng::for_stream(31, i)());
    for (ThresholdSense sense : {ThresholdSense::Inequality, ThresholdSense::Equality}) {
      const RelaxationStructure r = relaxation_structure(s, {}, sense);
      ASSERT_EQ(r.status, SdpStatus::Optimal);
      EXPECT_LE(r.off_block_ratio, 1e-6);
      EXPECT_LE(r.uav_block_ratio, 1e-6);
      if (sense == ThresholdSense::Inequality) rank_gt_one += r.second_eig_ratio >= 0.01;
    }
  }
  EXPECT_GE(rank_gt_one, 9);
}

TEST(LowerBound, ZeroUeUsesFullBuild) {
  const Scenario s = sampled(0, 2, 4, 14);
  EXPECT_GT(lower_bound_power(s), 0.0);
}
