#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include "jcj/baseline_ci.hpp"
#include "jcj/metrics.hpp"

using namespace jcj;

TEST(AchievableRate, Examples) {
  ComplexVector h(1);
  h << 1.0;
  const double s2 = 0.25;
  ComplexMatrix f(1, 1);
  f << std::sqrt(s2);
  EXPECT_NEAR(achievable_rate(h, f, 0, s2), 1.0, 1e-15);
  ComplexMatrix f2(1, 2);
  f2 << std::sqrt(3 * s2), cplx(0.0, std::sqrt(s2));
  EXPECT_NEAR(achievable_rate(h, f2, 0, s2), std::log2(2.5), 1e-15);
  EXPECT_NEAR(achievable_rate(h, f2, 0, s2), 1.3219, 1e-4);
  EXPECT_EQ(achievable_rate(h, ComplexMatrix::Zero(1, 2), 1, s2), 0.0);
  EXPECT_THROW(achievable_rate(h, f2, 2, s2), DomainError);
}

TEST(UavSinr, Examples) {
  const double pe = dbm_to_mw(-81.0), s2 = dbm_to_mw(-101.0);
  ComplexVector h(2);
  h << 1.0, 0.0;
  EXPECT_NEAR(uav_sinr_db(h, ComplexMatrix::Zero(2, 3), pe, s2), 20.0, 1e-12);
  ComplexMatrix f = ComplexMatrix::Zero(2, 1);
  f(0, 0) = std::sqrt(s2);
  EXPECT_NEAR(uav_sinr_db(h, f, pe, s2), 20.0 - 10.0 * std::log10(2.0), 1e-12);
  EXPECT_NEAR(uav_sinr_db(h, f, pe, s2), 16.9897, 1e-4);
  f(0, 0) = std::sqrt(4.0119 * s2);
  EXPECT_NEAR(uav_sinr_db(h, f, pe, s2), 13.0, 1e-4);
  EXPECT_THROW(uav_sinr_db(h, f, 0.0, s2), DomainError);
}

TEST(LinkFunctionals, ColumnPhaseInvariance) {
  CounterRng rng(3);
  ComplexVector h(4);
  ComplexMatrix f(4, 3);
  for (Index i = 0; i < 4; ++i) h[i] = cplx(rng.normal(), rng.normal());
  for (Index i = 0; i < 12; ++i) f.data()[i] = cplx(rng.normal(), rng.normal());
  ComplexMatrix g = f;
  for (Index j = 0; j < 3; ++j) g.col(j) *= std::polar(1.0, 0.7 * (j + 1));
  for (int n = 0; n < 3; ++n) EXPECT_NEAR(achievable_rate(h, f, n, 0.1), achievable_rate(h, g, n, 0.1), 1e-12);
  EXPECT_NEAR(uav_sinr_db(h, f, 2.0, 0.1), uav_sinr_db(h, g, 2.0, 0.1), 1e-12);
}

TEST(QFunction, ValuesAndInverse) {
  EXPECT_DOUBLE_EQ(q_function(0.0), 0.5);
  // Reference values computed at 30 digits.
  EXPECT_NEAR(erf_inv(0.5), 0.476936276204469873, 1e-14);
  EXPECT_NEAR(erf_inv(-0.9), -1.16308715367667409, 1e-14);
  // d erfinv/dy ~ 1.4e5 here, so one input ulp moves the result by ~1.6e-11.
  EXPECT_NEAR(erf_inv(0.999999), 3.45891073727950002, 1e-10);
  EXPECT_NEAR(erf_inv(1e-10), 8.86226925452758014e-11, 1e-24);
  EXPECT_NEAR(erf_inv(0.1), 0.0888559904942576870, 1e-15);
  EXPECT_NEAR(erfc_inv(1e-300), 26.2094699605161239, 1e-12);
  EXPECT_NEAR(q_inverse(2.5e-6), 4.56478773028088435, 1e-12);
  for (double x = -6.0; x <= 6.0; x += 0.25) {
    const double y = std::erf(x);
    if (std::abs(y) < 1.0) EXPECT_NEAR(std::erf(erf_inv(y)), y, 1e-15);
    const double yc = std::erfc(x);
    if (x >= -3.0 && yc > 0.0) EXPECT_NEAR(erfc_inv(yc), x, 1e-10);
  }
  EXPECT_THROW(erfc_inv(0.0), DomainError);
  EXPECT_THROW(erfc_inv(2.0), DomainError);
  EXPECT_THROW(q_inverse(1.0), DomainError);
}

TEST(SinrThreshold, QpskAtOneInTenToTheFive) {
  EXPECT_NEAR(sinr_threshold_db(1e-5, 4), 13.19, 0.01);
  EXPECT_NEAR(sinr_threshold_db(1e-5, 4), 13.1884117394388352, 1e-10);
}

TEST(SinrThreshold, ModulationOrderShift) {
  for (double ber : {1e-3, 1e-5, 1e-7}) {
    EXPECT_NEAR(sinr_threshold_db(ber, 16) - sinr_threshold_db(ber, 4), 10.0 * std::log10(5.0), 1e-12);
  }
}

TEST(SinrThreshold, RoundTrip) {
  for (double ber : {1e-2, 1e-3, 1e-5, 1e-7, 1e-9}) {
    for (int k : {4, 16, 64}) {
      EXPECT_NEAR(ber_from_sinr_db(sinr_threshold_db(ber, k), k), ber, 1e-7 * ber);
    }
  }
  EXPECT_THROW(sinr_threshold_db(0.0, 4), DomainError);
  EXPECT_THROW(sinr_threshold_db(1.0, 4), DomainError);
}

TEST(EmpiricalCdf, Examples) {
  const CdfSeries c = empirical_cdf({3, 1, 2});
  EXPECT_EQ(c.values, (std::vector<double>{1, 2, 3}));
  EXPECT_NEAR(c.probabilities[0], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(c.probabilities[1], 2.0 / 3.0, 1e-15);
  EXPECT_EQ(c.probabilities[2], 1.0);
  const CdfSeries e = empirical_cdf({5, 5, 5, 5});
  for (double v : e.values) EXPECT_EQ(v, 5.0);
  EXPECT_EQ(e.probabilities.back(), 1.0);
  EXPECT_THROW(empirical_cdf({}), DomainError);
  EXPECT_THROW(empirical_cdf({1.0, std::nan("")}), DomainError);
}

TEST(Percentile, NearestRank) {
  std::vector<double> v;
  for (int i = 10; i >= 1; --i) v.push_back(i);
  EXPECT_EQ(percentile(v, 0.8), 8.0);
  EXPECT_EQ(percentile(v, 0.5), 5.0);
  EXPECT_EQ(percentile(v, 0.81), 9.0);
  EXPECT_EQ(percentile(v, 1.0), 10.0);
  EXPECT_EQ(percentile(v, 0.01), 1.0);
  EXPECT_THROW(percentile(v, 0.0), DomainError);
}

TEST(RealizationMetrics, Definitions) {
  ScenarioConfig c;
  const Scenario s = sample_scenario(c, 2);
  const CiBeamformer ci = run_ci(s);
  RealizationResult r = realization_metrics(s, &ci.f, &ci.f, ci.power_mw);
  EXPECT_EQ(*r.power_error_mw, 0.0);
  EXPECT_EQ(*r.normalized_power_error, 0.0);
  EXPECT_LE(*r.rate_error, 1e-6);
  EXPECT_LE(*r.ci_sinr_error, 1e-5);

  const ComplexMatrix f2 = ci.f * std::sqrt(2.0 / ci.power_mw);  // tr = 2
  r = realization_metrics(s, &f2, nullptr, 1.0);
  EXPECT_NEAR(*r.power_error_mw, 1.0, 1e-12);
  EXPECT_NEAR(*r.normalized_power_error, 0.5, 1e-12);
  EXPECT_NEAR(*r.normalized_power_error, *r.power_error_mw / *r.jcj_power_mw, 1e-12);
  EXPECT_FALSE(r.ci_power_mw.has_value());

  r = realization_metrics(s, nullptr, nullptr, std::nullopt);
  EXPECT_FALSE(r.jcj_power_mw.has_value());
  EXPECT_FALSE(r.power_error_mw.has_value());
}

TEST(LinkErrors, InactiveUavIgnored) {
  ScenarioConfig c;
  c.eaves_power_dbm = -110.0;  // noise alone already keeps the UAV below threshold
  const Scenario s = sample_scenario(c, 4);
  const auto active = active_uavs(s);
  EXPECT_FALSE(active[0]);
  EXPECT_EQ(link_errors(s, ComplexMatrix::Zero(s.n_tx(), s.n_streams())).sinr_error, 0.0);
}
