#include "ssdgp/cov_analysis.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

using namespace ssdgp;

namespace {

CovRecursionConfig example(int steps, double r = 0.1) {
  CovRecursionConfig c;
  c.mu = -1.0;
  c.a = -1.0;
  c.b = 1.0;
  c.dt = 0.1;
  c.p0_fs = 0.1;
  c.r_schedule.assign(steps, r);
  return c;
}

// classical RK4 on (P_ff, E[u^2])
std::pair<double, double> rk4(const CovRecursionConfig& c, double p, double e, double dt, int steps) {
  auto rhs = [&](double pp, double ee) { return std::pair{2.0 * c.mu * pp + ee, 2.0 * c.a * ee + c.b * c.b}; };
  const double h = dt / steps;
  for (int i = 0; i < steps; ++i) {
    const auto [k1p, k1e] = rhs(p, e);
    const auto [k2p, k2e] = rhs(p + 0.5 * h * k1p, e + 0.5 * h * k1e);
    const auto [k3p, k3e] = rhs(p + 0.5 * h * k2p, e + 0.5 * h * k2e);
    const auto [k4p, k4e] = rhs(p + h * k3p, e + h * k3e);
    p += h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
    e += h / 6.0 * (k1e + 2 * k2e + 2 * k3e + k4e);
  }
  return {p, e};
}

}  // namespace

TEST(PredictMoments, CrossCovarianceDecay) {
  CovRecursionConfig c = example(0);
  EXPECT_EQ(predict_moments(c, 0.0, 0.3, 0.5, 0.7).p_fs, 0.0);
  EXPECT_NEAR(predict_moments(c, 0.8, 0.3, 0.5, std::log(2.0)).p_fs, 0.2, 1e-15);
}

TEST(PredictMoments, MatchesOdeIntegration) {
  for (double a : {-1.0, -0.7, -1.0 + 1e-14}) {
    CovRecursionConfig c = example(0);
    c.mu = -1.0;
    c.a = a;
    c.b = 0.8;
    const PredictedMoments m = predict_moments(c, 0.0, 0.3, 1.2, 0.5);
    const auto [p, e] = rk4(c, 0.3, 1.2, 0.5, 2000);
    EXPECT_NEAR(m.p_ff, p, 1e-12);
    EXPECT_NEAR(m.e_usq, e, 1e-12);
  }
  // stationary moments are fixed points
  const CovRecursionConfig c = example(0);
  const PredictedMoments s = predict_moments(c, 0.0, c.stationary_ff(), c.stationary_usq(), 0.3);
  EXPECT_NEAR(s.p_ff, c.stationary_ff(), 1e-15);
  EXPECT_NEAR(s.e_usq, c.stationary_usq(), 1e-15);
}

TEST(PredictMoments, MatchesMonteCarlo) {
  CovRecursionConfig c = example(0);
  c.mu = -1.5;
  c.a = -0.7;
  c.b = 0.8;
  const double p0 = 0.3, e0 = 1.2, dt = 0.5, f_u_corr = 0.4;
  const int paths = 100000, sub = 500;
  const double h = dt / sub;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  double s_ff = 0.0, s_ff2 = 0.0, s_fu = 0.0, s_fu2 = 0.0;
  const double cov0 = f_u_corr * std::sqrt(p0 * e0);
  for (int i = 0; i < paths; ++i) {
    const double z1 = normal(rng), z2 = normal(rng);
    double u = std::sqrt(e0) * z1;
    double f = cov0 / std::sqrt(e0) * z1 + std::sqrt(p0 - cov0 * cov0 / e0) * z2;
    for (int j = 0; j < sub; ++j) {
      const double f_next = f + c.mu * f * h + u * std::sqrt(h) * normal(rng);
      u += c.a * u * h + c.b * std::sqrt(h) * normal(rng);
      f = f_next;
    }
    s_ff += f * f;
    s_ff2 += f * f * f * f;
    s_fu += f * u;
    s_fu2 += f * u * f * u;
  }
  const PredictedMoments m = predict_moments(c, cov0, p0, e0, dt);
  const double mean_ff = s_ff / paths, se_ff = std::sqrt((s_ff2 / paths - mean_ff * mean_ff) / paths);
  const double mean_fu = s_fu / paths, se_fu = std::sqrt((s_fu2 / paths - mean_fu * mean_fu) / paths);
  EXPECT_NEAR(mean_ff, m.p_ff, 3.0 * se_ff);
  EXPECT_NEAR(mean_fu, m.p_fs, 3.0 * se_fu);
}

TEST(CovRecursion, BoundHoldsAndCovarianceVanishes) {
  const CovRecursionConfig c = example(200);
  const CovRecursion rec = gf_covariance_recursion(c);
  const CovBound bound = covariance_bound(rec, c.p0_fs);
  ASSERT_EQ(rec.size(), 200u);
  EXPECT_TRUE(bound.holds);
  for (std::size_t k = 0; k < rec.size(); ++k) {
    EXPECT_LE(std::abs(rec.post_fs[k]), bound.bound[k]);
    if (k > 0) EXPECT_LT(std::abs(rec.post_fs[k]), std::abs(rec.post_fs[k - 1]));
  }
  EXPECT_GT(bound.crossing_step, 0);
  EXPECT_LT(std::abs(rec.post_fs.back()), 1e-4);

  // one update: |P_fs,1| <= |P0_fs| M_1
  EXPECT_LE(std::abs(rec.post_fs[0]), c.p0_fs * rec.m[0]);
}

TEST(CovRecursion, PerfectMeasurementZeroesCovariance) {
  CovRecursionConfig c = example(30);
  c.r_schedule[4] = 0.0;
  const CovRecursion rec = gf_covariance_recursion(c);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_NE(rec.post_fs[k], 0.0);
  for (std::size_t k = 4; k < rec.size(); ++k) EXPECT_EQ(rec.post_fs[k], 0.0) << k;
  EXPECT_TRUE(covariance_bound(rec, c.p0_fs).holds);

  CovRecursionConfig zero = example(20);
  zero.p0_fs = 0.0;
  for (double v : gf_covariance_recursion(zero).post_fs) EXPECT_EQ(v, 0.0);
}

TEST(CovRecursion, PredictionOnlyLimit) {
  const CovRecursionConfig c = example(300, std::numeric_limits<double>::infinity());
  const CovRecursion rec = gf_covariance_recursion(c);
  for (double m : rec.m) EXPECT_EQ(m, 1.0);
  EXPECT_LT(std::abs(rec.pred_fs.back()), 1e-20);
  EXPECT_NEAR(rec.pred_ff.back(), c.stationary_ff(), 1e-12);
}

TEST(CovRecursion, RejectsInvalidConstants) {
  CovRecursionConfig c = example(5);
  c.mu = 0.5;
  EXPECT_THROW(gf_covariance_recursion(c), ConfigError);
  c = example(5);
  c.r_schedule[2] = -1.0;
  EXPECT_THROW(gf_covariance_recursion(c), ConfigError);
}

TEST(VarianceFloor, BelowObservedVarianceAndGeometricDecay) {
  const CovRecursionConfig c = example(200);
  const CovRecursion rec = gf_covariance_recursion(c);
  const double floor = variance_floor(variance_floor_inputs(c));
  EXPECT_GT(floor, 0.0);
  EXPECT_LE(floor, *std::min_element(rec.pred_ff.begin(), rec.pred_ff.end()));
  const double rate = 0.1 / (floor + 0.1);
  EXPECT_LT(rate, 1.0);
  double geometric = c.p0_fs;
  const CovBound bound = covariance_bound(rec, c.p0_fs);
  for (std::size_t k = 0; k < rec.size(); ++k) {
    EXPECT_LE(rec.m[k], rate);
    geometric *= rate;
    EXPECT_LE(bound.bound[k], geometric * (1.0 + 1e-12));
  }
}

TEST(VarianceFloor, Validation) {
  VarianceFloorInputs in{0.25, 0.5, 0.25, 1.0, 0.1};
  EXPECT_NEAR(variance_floor(in), 0.25 * 0.1 / std::exp(0.1), 1e-15);
  in.epsilon = 0.5;  // = C_theta / (2 sqrt(C))
  EXPECT_THROW(variance_floor(in), ConfigError);
  in.epsilon = 0.25;
  in.dt = 1e-12;
  EXPECT_LT(variance_floor(in), 1e-12);
}

TEST(CovRecursion, CsvRows) {
  const CovRecursionConfig c = example(3);
  const CovRecursion rec = gf_covariance_recursion(c);
  std::ostringstream os;
  write_recursion_csv(rec, covariance_bound(rec, c.p0_fs), os);
  const std::string s = os.str();
  EXPECT_EQ(s.rfind("k,pred_ff,pred_fs,post_fs,M,bound\n1,", 0), 0u);
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 4);
}
