#include "models.hpp"
#include "ssdgp/prior_sampling.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace ssdgp;
using ssdgp::testing::dgp2;
using ssdgp::testing::dgp3;
using ssdgp::testing::single_node;

TEST(Wrap, Values) {
  EXPECT_DOUBLE_EQ(wrap({WrapKind::Exp}, 0.0).value, 1.0);
  EXPECT_DOUBLE_EQ(wrap({WrapKind::SquarePlusC, 0.1}, 0.0).value, 0.1);
  EXPECT_DOUBLE_EQ(wrap({WrapKind::InverseSquarePlusC, 1.0}, 1.0).value, 0.5);
}

TEST(Wrap, PositiveEverywhereAndClamped) {
  const std::vector<Wrapping> kinds = {{WrapKind::Exp}, {WrapKind::SquarePlusC, 0.01}, {WrapKind::InverseSquarePlusC, 0.5}};
  for (const auto& w : kinds) {
    for (double u = -1000.0; u <= 1000.0; u += 0.37) {
      const double g = wrap(w, u).value;
      EXPECT_TRUE(std::isfinite(g));
      EXPECT_GT(g, 0.0);
    }
  }
  EXPECT_DOUBLE_EQ(wrap({WrapKind::Exp}, 800.0).value, std::exp(40.0));
  EXPECT_DOUBLE_EQ(wrap({WrapKind::Exp}, -800.0).value, std::exp(-40.0));
}

TEST(Wrap, DerivativesMatchCentralDifferences) {
  const std::vector<Wrapping> kinds = {{WrapKind::Exp}, {WrapKind::SquarePlusC, 0.3}, {WrapKind::InverseSquarePlusC, 0.7}};
  const double h = 1e-4;
  for (const auto& w : kinds) {
    for (double u = -5.0; u <= 5.0; u += 0.25) {
      const WrapValue v = wrap(w, u);
      const double d1 = (wrap(w, u + h).value - wrap(w, u - h).value) / (2 * h);
      const double d2 = (wrap(w, u + h).d1 - wrap(w, u - h).d1) / (2 * h);
      EXPECT_NEAR(v.d1, d1, 1e-6 * std::max(1.0, std::abs(d1)));
      EXPECT_NEAR(v.d2, d2, 1e-6 * std::max(1.0, std::abs(d2)));
    }
  }
}

TEST(Wrap, TaylorAgreesWithScalar) {
  const TaylorSpace& space = taylor_space(1, 3);
  const std::vector<Wrapping> kinds = {{WrapKind::Exp}, {WrapKind::SquarePlusC, 0.3}, {WrapKind::InverseSquarePlusC, 0.7}};
  for (const auto& w : kinds) {
    const Taylor t = wrap(w, Taylor::variable(space, 0, 0.8));
    const WrapValue v = wrap(w, 0.8);
    EXPECT_NEAR(t.value(), v.value, 1e-14);
    EXPECT_NEAR(t.gradient(0), v.d1, 1e-13);
    EXPECT_NEAR(2.0 * t.coefficients()[2], v.d2, 1e-12);
  }
}

TEST(BuildDgp, SingleNodeReducesToMatern) {
  for (int alpha = 0; alpha <= 2; ++alpha) {
    const DgpModel model = single_node(alpha, 0.6, 1.4);
    const LtiSde ref = matern_sde_coefficients({alpha, 0.6, 1.4});
    const LtiSde sde = model.linear_sde();
    ASSERT_EQ(model.state_dim(), alpha + 1);
    EXPECT_LT((sde.drift - ref.drift).norm(), 1e-14 * ref.drift.norm());
    EXPECT_NEAR(sde.dispersion(alpha, alpha), ref.dispersion(alpha, 0), 1e-14 * ref.dispersion.norm());
    EXPECT_EQ(sde.observation, ref.observation);

    const Vector u = Vector::LinSpaced(alpha + 1, -0.5, 0.8);
    EXPECT_LT((model.joint_drift(u) - ref.drift * u).norm(), 1e-13);
  }
}

TEST(BuildDgp, Example2Layout) {
  const DgpModel model = dgp2(0);
  EXPECT_EQ(model.num_nodes(), 3);
  EXPECT_EQ(model.state_dim(), 3);
  EXPECT_FALSE(model.is_linear());
  EXPECT_EQ(model.observation_row(), (Eigen::RowVectorXd(3) << 1, 0, 0).finished());

  Vector u(3);
  u << 1.0, 0.0, 0.0;
  const Vector drift = model.joint_drift(u);
  EXPECT_DOUBLE_EQ(drift(0), -1.0);  // -f / g(0)
  EXPECT_DOUBLE_EQ(drift(1), 0.0);
  EXPECT_DOUBLE_EQ(drift(2), 0.0);

  u << 1.0, 0.3, -0.2;
  const Vector d2 = model.joint_drift(u);
  EXPECT_NEAR(d2(0), -1.0 / std::exp(0.3), 1e-15);
  EXPECT_NEAR(d2(1), -0.3 / 0.5, 1e-15);
  EXPECT_NEAR(d2(2), 0.2 / 0.5, 1e-15);

  const Matrix beta = model.joint_dispersion(Vector::Zero(3));
  EXPECT_NEAR(beta(0, 0), std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(beta(1, 1), std::sqrt(2.0) * 1.0 / std::sqrt(0.5), 1e-14);
  const Matrix beta2 = model.joint_dispersion(u);
  EXPECT_NEAR(beta2(0, 0), std::sqrt(2.0) * std::exp(-0.2) / std::sqrt(std::exp(0.3)), 1e-14);
}

TEST(BuildDgp, ZeroStateHasZeroDrift) {
  const DgpModel model = dgp2(1, {WrapKind::SquarePlusC, 0.1});
  EXPECT_EQ(model.joint_drift(Vector::Zero(model.state_dim())).norm(), 0.0);
}

TEST(BuildDgp, Matern32NodeDispersion) {
  const DgpModel model = dgp2(1);
  Vector u = Vector::Zero(4);
  u(2) = 0.4;   // lengthscale parent
  u(3) = -0.3;  // magnitude parent
  const double ell = std::exp(0.4);
  const double sigma = std::exp(-0.3);
  const double kappa = std::sqrt(3.0) / ell;
  const Matrix beta = model.joint_dispersion(u);
  EXPECT_NEAR(beta(1, 1), 2.0 * sigma * std::pow(kappa, 1.5), 1e-13);
  EXPECT_EQ(beta(0, 0), 0.0);
  const LtiSde ref = matern_sde_coefficients({1, ell, sigma});
  EXPECT_NEAR(beta(1, 1), ref.dispersion(1, 0), 1e-13);
}

TEST(BuildDgp, LayoutIsABijection) {
  const DgpModel model = dgp3();
  EXPECT_EQ(model.num_nodes(), 7);
  EXPECT_EQ(model.state_dim(), 8);
  std::vector<int> owner(model.state_dim(), -1);
  for (int n = 0; n < model.num_nodes(); ++n) {
    for (int j = 0; j < model.block_dim(n); ++j) {
      ASSERT_EQ(owner[model.block_offset(n) + j], -1);
      owner[model.block_offset(n) + j] = n;
    }
  }
  for (int o : owner) EXPECT_GE(o, 0);
}

TEST(BuildDgp, RejectsBadHierarchies) {
  auto expect_error = [](std::vector<DgpNodeSpec> nodes, const std::string& needle) {
    try {
      build_dgp(std::move(nodes));
      ADD_FAILURE() << "expected failure containing " << needle;
    } catch (const ConfigError& e) {
      EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
  };
  const auto fixed = ParamSource::fixed(1.0);
  expect_error({{{1, 1}, 0, fixed, fixed}, {{1, 1}, 0, fixed, fixed}}, "duplicate node");
  // cross-layer link
  expect_error({{{1, 1}, 0, ParamSource::linked({3, 1}), fixed},
                {{2, 1}, 0, fixed, fixed},
                {{3, 1}, 0, fixed, fixed}},
               "invalid hierarchy");
  // shared parent
  expect_error({{{1, 1}, 0, ParamSource::linked({2, 1}), ParamSource::linked({2, 1})}, {{2, 1}, 0, fixed, fixed}},
               "invalid hierarchy");
  // orphan
  expect_error({{{1, 1}, 0, fixed, fixed}, {{2, 1}, 0, fixed, fixed}}, "invalid hierarchy");
  // missing parent
  expect_error({{{1, 1}, 0, ParamSource::linked({2, 5}), fixed}}, "invalid hierarchy");
  // no root
  expect_error({{{2, 1}, 0, fixed, fixed}}, "invalid hierarchy");
  EXPECT_THROW(build_dgp({{{1, 1}, 0, ParamSource::fixed(-1.0), fixed}}), ConfigError);
}

TEST(BuildDgp, JsonRoundTrip) {
  const nlohmann::json doc = nlohmann::json::parse(R"({
    "nodes": [
      {"layer": 1, "position": 1, "alpha": 1,
       "lengthscale": {"parent": [2, 1], "wrap": "square_plus_c", "c": 0.2},
       "magnitude": {"value": 0.9}},
      {"layer": 2, "position": 1, "alpha": 0, "lengthscale": 0.3, "magnitude": {"value": 1.1}}
    ]})");
  const DgpModel model = parse_model(doc);
  EXPECT_EQ(model.state_dim(), 3);
  EXPECT_EQ(model.nodes()[0].lengthscale.wrapping.kind, WrapKind::SquarePlusC);
  EXPECT_DOUBLE_EQ(model.nodes()[0].lengthscale.wrapping.c, 0.2);
  EXPECT_DOUBLE_EQ(model.nodes()[1].lengthscale.value, 0.3);
  const DgpModel again = parse_model(model_to_json(model));
  EXPECT_EQ(model_to_json(again), model_to_json(model));

  EXPECT_THROW(parse_model(nlohmann::json::parse(R"({"nodes": [{"layer": 1}]})")), ConfigError);
  EXPECT_THROW(parse_model(nlohmann::json::parse(
                   R"({"nodes": [{"layer": 1, "position": 1, "lengthscale": {"parent": [2,1], "wrap": "cube"},
                                  "magnitude": 1}]})")),
               ConfigError);
}

TEST(InitialCondition, StationaryBlocksAtPriorMeans) {
  const DgpModel model = dgp2(1);
  const GaussianBelief p0 = model.initial_condition();
  EXPECT_EQ(p0.mean.norm(), 0.0);
  // f block: Matérn-3/2 with l = sigma = g(0) = 1
  EXPECT_NEAR(p0.cov(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(p0.cov(1, 1), 3.0, 1e-12);
  EXPECT_NEAR(p0.cov(2, 2), 1.0, 1e-12);
  EXPECT_EQ(p0.cov(0, 2), 0.0);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(p0.cov);
  EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
}

TEST(SamplePrior, MarginalVarianceMatchesStationary) {
  const DgpModel model = single_node(1, 0.5, 1.3);
  const std::vector<double> grid = {0.0, 0.4};
  const int paths = 20000;
  double s0 = 0.0, s1 = 0.0;
  for (int p = 0; p < paths; ++p) {
    const PriorSample sample = sample_prior(model, grid, 1, 1000 + p, Scheme::parse("exact"));
    s0 += sample.states(1, 0) * sample.states(1, 0);
    s1 += sample.states(1, 1) * sample.states(1, 1);
  }
  const Matrix pinf = solve_stationary_covariance(matern_sde_coefficients({1, 0.5, 1.3}));
  // variance of a sample variance estimate of a Gaussian: 2 v^2 / n
  EXPECT_NEAR(s0 / paths, pinf(0, 0), 3.0 * std::sqrt(2.0 / paths) * pinf(0, 0));
  EXPECT_NEAR(s1 / paths, pinf(1, 1), 3.0 * std::sqrt(2.0 / paths) * pinf(1, 1));
}

TEST(SamplePrior, ZeroDispersionDecaysDeterministically) {
  const DgpModel model = single_node(0, 0.5, 0.0);
  std::vector<double> grid;
  for (int k = 0; k <= 20; ++k) grid.push_back(0.1 * k);
  Vector x0(1);
  x0 << 2.0;
  const PriorSample a = sample_prior(model, grid, 4, 1, Scheme::parse("tme-3"), x0);
  const PriorSample b = sample_prior(model, grid, 4, 2, Scheme::parse("tme-3"), x0);
  EXPECT_EQ(a.states, b.states);
  for (int k = 1; k <= 20; ++k) {
    EXPECT_LT(std::abs(a.states(k, 0)), std::abs(a.states(k - 1, 0)));
    EXPECT_NEAR(a.states(k, 0), 2.0 * std::exp(-2.0 * grid[k]), 1e-5);
  }
}

TEST(SamplePrior, ReproducibleUnderSeed) {
  const DgpModel model = dgp2(1);
  std::vector<double> grid;
  for (int k = 0; k < 50; ++k) grid.push_back(0.02 * k);
  const PriorSample a = sample_prior(model, grid, 2, 42);
  const PriorSample b = sample_prior(model, grid, 2, 42);
  const PriorSample c = sample_prior(model, grid, 2, 43);
  EXPECT_EQ(a.states, b.states);
  EXPECT_NE(a.states, c.states);
  EXPECT_EQ(a.node_paths.cols(), 3);
  EXPECT_EQ(a.node_paths.col(1), a.states.col(2));
  EXPECT_THROW(sample_prior(model, {0.0, 0.0}, 1, 1), ConfigError);
}
