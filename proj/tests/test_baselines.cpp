#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "mcpilot/baselines.hpp"

using namespace mcpilot;
using namespace mcpilot::testing;

TEST(Ballistic, ClosedFormExample) {
  const ReleaseGeometry geom{0.07, 1.5, 0.0};
  const double v = ballistic_speed({1.5, 0.0, 0.0}, geom, PhysicalConstants{});
  EXPECT_NEAR(v, std::sqrt(9.81 * 1.43 * 1.43 / 3.0), 1e-12);
  EXPECT_NEAR(v, 2.586, 5e-4);
}

TEST(Ballistic, ZeroDistanceAndSymmetry) {
  const ReleaseGeometry geom{0.07, 1.5, 0.1};
  const PhysicalConstants c;
  EXPECT_EQ(ballistic_speed({0.07 * std::cos(0.3), 0.07 * std::sin(0.3), -1.0}, geom, c), 0.0);
  for (double l : {0.8, 1.5, 2.3}) {
    const double g = 0.4;
    EXPECT_DOUBLE_EQ(ballistic_speed({l * std::cos(g), l * std::sin(g), -1}, geom, c),
                     ballistic_speed({l * std::cos(g), -l * std::sin(g), -1}, geom, c));
  }
}

TEST(Ballistic, RejectsUnreachableTargets) {
  const PhysicalConstants c;
  // Above the release height with a flat throw: no parabola reaches it.
  EXPECT_THROW(ballistic_speed({1.0, 0.0, 2.0}, {0.07, 1.5, 0.0}, c), std::domain_error);
  // Behind the release point along the bearing cannot happen; the bearing follows the target.
  const BallisticPolicy pi{{0.07, 1.5, 0.0}, c, 3.5};
  EXPECT_TRUE(pi.infeasible({30.0, 0.0, -1.0}));
  EXPECT_EQ(pi({30.0, 0.0, -1.0}), 3.5);
  EXPECT_FALSE(pi.infeasible({1.0, 0.0, -1.0}));
}

TEST(Ballistic, InvertsDragFreeWorld) {
  Settings s = sim_settings(false, false);
  const World w(s.arm, s.world);
  const BallisticPolicy pi{s.geometry(), s.world.constants, s.u_M};
  RngStream rng(1);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      const double l = s.domain.l_min + (s.domain.l_max - s.domain.l_min) * i / 4.0;
      const double g = -s.domain.gamma_max + 2 * s.domain.gamma_max * j / 4.0;
      const TargetPoint P{l * std::cos(g), l * std::sin(g), s.domain.z};
      ThrowPlan plan = plan_throw(g, pi(P), s.arm, s.timing);
      const ThrowRecord r = w.execute(plan, P, rng);
      EXPECT_LE(r.error(), 1e-3) << "l = " << l << ", gamma = " << g;
    }
  }
}

TEST(Mlp, ZeroWeightsGiveHalfCap) {
  Mlp net(2, 16, 3.5);
  for (auto& W : net.weights()) W.setZero();
  for (auto& b : net.biases()) b.setZero();
  EXPECT_DOUBLE_EQ(net(Vec3(1, 2, 3)), 1.75);
  EXPECT_EQ(net.hidden_layers(), 2);
}

TEST(Mlp, OutputsInsideOpenIntervalAndDeterministic) {
  RegressionSet data;
  RngStream rng(3);
  for (int i = 0; i < 30; ++i) {
    data.inputs.push_back(Vec3(rng.uniform(0.5, 2.5), rng.uniform(-1, 1), -1.0));
    data.speeds.push_back(rng.uniform(0.5, 3.4));
  }
  MlpTrainConfig cfg;
  cfg.width = 32;
  cfg.epochs = 200;
  RngStream r1(5), r2(5);
  const auto a = train_mlp(data, cfg, r1), b = train_mlp(data, cfg, r2);
  for (int k = 0; k < 100; ++k) {
    const Vec3 x(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-3, 3));
    const double v = a.model(x);
    ASSERT_GT(v, 0.0);
    ASSERT_LT(v, 3.5);
    ASSERT_EQ(v, b.model(x));
  }
  EXPECT_EQ(a.final_loss, b.final_loss);
}

TEST(Mlp, TrainingLossDecreases) {
  Settings s = sim_settings();
  const World w(s.arm, s.world);
  RngStream rng(4);
  const RegressionSet data = collect_regression_set(s, w, 60, rng);
  ASSERT_EQ(data.size(), 60u);
  MlpTrainConfig cfg;
  cfg.epochs = 500;
  const auto r = train_mlp(data, cfg, rng);
  ASSERT_EQ(r.loss.size(), 500u);
  EXPECT_LE(r.final_loss, r.loss.front());
  EXPECT_LT(r.final_loss, 0.1 * r.loss.front());
}

TEST(Mlp, OverfitsSingleExample) {
  RegressionSet data;
  data.inputs.push_back(Vec3(1.3, 0.2, -1.0));
  data.speeds.push_back(2.7);
  MlpTrainConfig cfg;
  cfg.width = 32;
  cfg.epochs = 2000;
  RngStream rng(6);
  const auto r = train_mlp(data, cfg, rng);
  EXPECT_NEAR(r.model(data.inputs[0]), 2.7, 1e-2);
}

TEST(Mlp, ValidatesInputs) {
  RngStream rng(1);
  EXPECT_THROW(train_mlp(RegressionSet{}, MlpTrainConfig{}, rng), std::invalid_argument);
  RegressionSet bad;
  bad.inputs.push_back(Vec3::Zero());
  EXPECT_THROW(train_mlp(bad, MlpTrainConfig{}, rng), std::invalid_argument);
  RegressionSet one;
  one.inputs.push_back(Vec3::Zero());
  one.speeds.push_back(1.0);
  MlpTrainConfig cfg;
  cfg.hidden_layers = 4;
  EXPECT_THROW(train_mlp(one, cfg, rng), std::invalid_argument);
}
