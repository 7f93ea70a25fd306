#include <gtest/gtest.h>

#include <Eigen/Geometry>
#include <cmath>
#include <numbers>

#include "mcpilot/kinematics.hpp"

using namespace mcpilot;

namespace {

constexpr double kPi = std::numbers::pi;

// Homogeneous-transform chain written out from the manufacturer table,
// independent of the library's recursion.
Vec3 oracle_fk(const Joints& q, const Vec3& tool) {
  const double a[7] = {0, 0, 0, 0.0825, -0.0825, 0, 0.088};
  const double d[7] = {0.333, 0, 0.316, 0, 0.384, 0, 0};
  const double al[7] = {0, -kPi / 2, kPi / 2, kPi / 2, -kPi / 2, kPi / 2, kPi / 2};
  Eigen::Isometry3d T = Eigen::Isometry3d::Identity();
  T.rotate(Eigen::AngleAxisd(kPi, Vec3::UnitZ()));
  for (int i = 0; i < 7; ++i) {
    T.rotate(Eigen::AngleAxisd(al[i], Vec3::UnitX()));
    T.translate(Vec3(a[i], 0, 0));
    T.rotate(Eigen::AngleAxisd(q(i), Vec3::UnitZ()));
    T.translate(Vec3(0, 0, d[i]));
  }
  T.translate(Vec3(0, 0, 0.107));
  return T * tool;
}

Joints random_q(const ArmModel& arm, RngStream& rng) {
  Joints q;
  for (int i = 0; i < kArmDof; ++i) {
    q(i) = rng.uniform(arm.limits.q_min(i) + 0.05, arm.limits.q_max(i) - 0.05);
  }
  return q;
}

Jacobian fd_jacobian(const Joints& q, const ArmModel& arm, double h = 1e-6) {
  Jacobian J;
  for (int j = 0; j < kArmDof; ++j) {
    Joints qp = q, qm = q;
    qp(j) += h;
    qm(j) -= h;
    J.col(j) = (forward_kinematics(qp, arm) - forward_kinematics(qm, arm)) / (2 * h);
  }
  return J;
}

}  // namespace

TEST(ForwardKinematics, ReleaseConfigurationHitsCalibratedTip) {
  const ArmModel arm = ArmModel::panda();
  const Vec3 p = forward_kinematics(arm.release_configuration(0.0), arm);
  EXPECT_NEAR(p.x(), 0.07, 1e-3);
  EXPECT_NEAR(p.y(), 0.0, 1e-3);
  EXPECT_NEAR(p.z(), 1.50, 1e-3);
}

TEST(ForwardKinematics, MatchesIndependentTransformChain) {
  const ArmModel arm = ArmModel::panda();
  Joints q0 = Joints::Zero();
  q0(3) = -0.1;  // joint 4 upper limit is below zero
  EXPECT_NEAR((forward_kinematics(q0, arm) - oracle_fk(q0, arm.tool_offset)).norm(), 0.0, 1e-10);
  RngStream rng(3);
  for (int k = 0; k < 50; ++k) {
    const Joints q = random_q(arm, rng);
    ASSERT_NEAR((forward_kinematics(q, arm) - oracle_fk(q, arm.tool_offset)).norm(), 0.0, 1e-10);
  }
}

TEST(ForwardKinematics, BaseJointRotatesAboutZ) {
  const ArmModel arm = ArmModel::panda();
  const Vec3 p0 = forward_kinematics(arm.release_configuration(0.0), arm);
  for (double g : {-0.5, -0.2, 0.3, 0.52}) {
    const Vec3 p = forward_kinematics(arm.release_configuration(g), arm);
    EXPECT_NEAR((p - Eigen::AngleAxisd(g, Vec3::UnitZ()) * p0).norm(), 0.0, 1e-12);
    EXPECT_NEAR(p.z(), p0.z(), 1e-9);
  }
}

TEST(ForwardKinematics, RejectsOutOfLimitConfiguration) {
  const ArmModel arm = ArmModel::panda();
  Joints q = arm.release_configuration(0.0);
  q(1) = 3.0;
  EXPECT_THROW(forward_kinematics(q, arm), std::invalid_argument);
}

TEST(AnalyticalJacobian, MatchesFiniteDifferences) {
  const ArmModel arm = ArmModel::panda();
  RngStream rng(8);
  for (int k = 0; k < 20; ++k) {
    const Joints q = random_q(arm, rng);
    const Jacobian J = analytical_jacobian(q, arm), Jfd = fd_jacobian(q, arm);
    for (int j = 0; j < kArmDof; ++j) ASSERT_NEAR((J.col(j) - Jfd.col(j)).norm(), 0.0, 1e-5);
  }
  const Joints qr = arm.release_configuration(0.1);
  EXPECT_NEAR((analytical_jacobian(qr, arm) - fd_jacobian(qr, arm)).norm(), 0.0, 1e-5);
}

TEST(AnalyticalJacobian, ReferenceVelocityStructure) {
  const ArmModel arm = ArmModel::panda();
  const Vec3 vstar = reference_release_velocity(arm);
  EXPECT_GT(vstar.norm(), 0.0);
  const Joints q = arm.release_configuration(0.0);
  // Independent evaluation from the finite-difference Jacobian.
  const Vec3 v_fd = fd_jacobian(q, arm) * arm.qd_direction;
  EXPECT_NEAR((vstar - v_fd).norm(), 0.0, 1e-6);
  for (int j : {0, 2, 4, 6}) EXPECT_EQ(arm.qd_direction(j), 0.0);
  // Throw points along +x at gamma = 0, nearly horizontal.
  EXPECT_GT(vstar.x(), 0.0);
  EXPECT_NEAR(vstar.y(), 0.0, 1e-12);
  const ReleaseGeometry g = release_geometry(arm);
  EXPECT_NEAR(g.alpha, std::atan2(vstar.z(), vstar.x()), 1e-12);
  EXPECT_LT(std::abs(g.alpha), 0.1);
  EXPECT_NEAR(g.l_r, 0.07, 1e-3);
  EXPECT_NEAR(g.z_rel, 1.50, 1e-3);
}

TEST(ReleaseJointState, SpeedAndDirection) {
  const ArmModel arm = ArmModel::panda();
  const ReleaseGeometry geom = release_geometry(arm);
  EXPECT_TRUE(release_joint_state(0.2, 0.0, arm).qd.isZero());
  RngStream rng(4);
  for (int k = 0; k < 50; ++k) {
    const double g = rng.uniform(-kPi / 6, kPi / 6), v = rng.uniform(0.0, 3.5);
    const JointState js = release_joint_state(g, v, arm);
    EXPECT_DOUBLE_EQ(js.q(0), g);
    const Vec3 vel = analytical_jacobian(js.q, arm) * js.qd;
    ASSERT_NEAR(vel.norm(), v, 1e-9);
    ASSERT_NEAR((vel - v * velocity_direction(g, geom.alpha)).norm(), 0.0, 1e-9);
  }
  const JointState js = release_joint_state(0.0, 2.8, arm);
  EXPECT_NEAR((analytical_jacobian(js.q, arm) * js.qd).norm(), 2.8, 1e-9);
  EXPECT_THROW(release_joint_state(0.0, -0.1, arm), std::invalid_argument);
  EXPECT_THROW(release_joint_state(0.0, max_release_speed(arm) + 0.1, arm), std::domain_error);
}

TEST(Quintic, BoundaryConditions) {
  const Quintic q = Quintic::fit(0.3, -1.0, 2.0, 1.1, 0.5, -0.25, 0.7);
  EXPECT_NEAR(q.pos(0), 0.3, 1e-12);
  EXPECT_NEAR(q.vel(0), -1.0, 1e-12);
  EXPECT_NEAR(q.acc(0), 2.0, 1e-12);
  EXPECT_NEAR(q.pos(0.7), 1.1, 1e-12);
  EXPECT_NEAR(q.vel(0.7), 0.5, 1e-12);
  EXPECT_NEAR(q.acc(0.7), -0.25, 1e-12);
}

TEST(ThrowPlan, BoundaryValuesAndPeakVelocity) {
  const ArmModel arm = ArmModel::panda();
  const TimingConfig timing;
  const ThrowPlan plan = plan_throw(0.3, 3.2, arm, timing);
  const JointState rel = plan.at(timing.t_release);
  const JointState target = release_joint_state(0.3, 3.2, arm);
  EXPECT_NEAR((rel.q - target.q).norm(), 0.0, 1e-9);
  EXPECT_NEAR((rel.qd - target.qd).norm(), 0.0, 1e-9);
  EXPECT_NEAR(plan.acceleration(timing.t_release).norm(), 0.0, 1e-9);
  EXPECT_NEAR(plan.at(0.0).qd.norm(), 0.0, 1e-12);
  EXPECT_NEAR(plan.at(plan.duration()).qd.norm(), 0.0, 1e-12);
  // Release velocity is the profile peak on every moving joint.
  for (int k = 0; k <= 2000; ++k) {
    const double t = plan.duration() * k / 2000.0;
    const Joints qd = plan.at(t).qd;
    for (int j = 0; j < kArmDof; ++j) ASSERT_LE(std::abs(qd(j)), std::abs(rel.qd(j)) + 1e-12);
  }
}

TEST(ThrowPlan, ContinuousThroughSecondDerivativeAtRelease) {
  const ArmModel arm = ArmModel::panda();
  const ThrowPlan plan = plan_throw(-0.2, 2.5, arm, TimingConfig{});
  const double tr = plan.t_release(), e = 1e-7;
  const JointState a = plan.at(tr - e), b = plan.at(tr + e);
  EXPECT_NEAR((a.q - b.q).norm(), 0.0, 1e-6);
  EXPECT_NEAR((a.qd - b.qd).norm(), 0.0, 1e-5);
  EXPECT_NEAR((plan.acceleration(tr - e) - plan.acceleration(tr + e)).norm(), 0.0, 1e-4);
}

TEST(ThrowPlan, VelocityTermIsLinearInSpeed) {
  const ArmModel arm = ArmModel::panda();
  const ThrowPlan p1 = plan_throw(0.1, 1.5, arm, TimingConfig{});
  const ThrowPlan p2 = plan_throw(0.1, 3.0, arm, TimingConfig{});
  for (double t : {0.0, 0.1, 0.25, 0.4, 0.48, 0.6, 0.85}) {
    EXPECT_NEAR((p2.at(t).qd - 2.0 * p1.at(t).qd).norm(), 0.0, 1e-12);
    const Joints off1 = p1.at(t).q - p1.q_release(), off2 = p2.at(t).q - p2.q_release();
    EXPECT_NEAR((off2 - 2.0 * off1).norm(), 0.0, 1e-12);
  }
}

TEST(ThrowPlan, RespectsLimitsAcrossDomain) {
  const ArmModel arm = ArmModel::panda();
  for (double g = -kPi / 6; g <= kPi / 6 + 1e-9; g += kPi / 30) {
    for (double v = 0.0; v <= 3.5 + 1e-9; v += 0.25) EXPECT_NO_THROW(plan_throw(g, v, arm, {}));
  }
  TimingConfig fast;
  fast.t_release = 0.05;
  EXPECT_THROW(plan_throw(0.0, 3.5, arm, fast), std::domain_error);
}

TEST(ThrowPlan, CommandTimeAndRangeChecks) {
  ThrowPlan plan = plan_throw(0.0, 2.0, ArmModel::panda(), {});
  EXPECT_DOUBLE_EQ(plan.t_command(), plan.t_release());
  plan.set_command_time(0.3);
  EXPECT_DOUBLE_EQ(plan.t_command(), 0.3);
  EXPECT_THROW(plan.set_command_time(-0.1), std::out_of_range);
  EXPECT_THROW(plan.at(plan.duration() + 0.01), std::out_of_range);
}

TEST(ReleaseState, AtNominalTimeAndShortlyAfter) {
  const ArmModel arm = ArmModel::panda();
  const ReleaseGeometry geom = release_geometry(arm);
  const double g = 0.25, v = 2.8;
  const ThrowPlan plan = plan_throw(g, v, arm, {});
  const ReleaseState r = release_state_h(plan, plan.t_release(), arm);
  EXPECT_NEAR((r.p - geom.release_point(g)).norm(), 0.0, 1e-9);
  EXPECT_NEAR((r.v - v * velocity_direction(g, geom.alpha)).norm(), 0.0, 1e-9);

  const ReleaseState late = release_state_h(plan, plan.t_release() + 0.01, arm);
  const Vec3 shift = late.p - r.p;
  EXPECT_NEAR(shift.norm(), v * 0.01, 0.02 * v * 0.01);
  EXPECT_GT(shift.dot(r.v.normalized()), 0.99 * shift.norm());
  EXPECT_NEAR(late.v.norm(), v, 0.02 * v);
  EXPECT_THROW(release_state_h(plan, -0.01, arm), std::out_of_range);
}

TEST(ReleaseState, SpeedSensitivityMatchesFiniteDifferences) {
  const ArmModel arm = ArmModel::panda();
  const TimingConfig timing;
  for (double t : {0.40, 0.48, 0.495, 0.51}) {
    const double v = 2.3, h = 1e-5;
    ThrowPlan plan(0.2, v, arm, timing);
    const ReleaseStateSensitivity s = release_state_with_sensitivity(plan, t, arm);
    const ReleaseState rp = release_state_h(ThrowPlan(0.2, v + h, arm, timing), t, arm);
    const ReleaseState rm = release_state_h(ThrowPlan(0.2, v - h, arm, timing), t, arm);
    const Vec3 dp = (rp.p - rm.p) / (2 * h), dv = (rp.v - rm.v) / (2 * h);
    EXPECT_NEAR((s.dp_dspeed - dp).norm(), 0.0, 1e-5 * std::max(1.0, dp.norm()));
    EXPECT_NEAR((s.dv_dspeed - dv).norm(), 0.0, 1e-5 * std::max(1.0, dv.norm()));
    EXPECT_NEAR((s.value.p - release_state_h(plan, t, arm).p).norm(), 0.0, 1e-14);
  }
}

TEST(ArmModel, ConfigOverridesRecalibrateTool) {
  const Config cfg = Config::parse("arm.flange_d = 0.2\n");
  const ArmModel arm = ArmModel::from_config(cfg);
  const Vec3 p = forward_kinematics(arm.release_configuration(0.0), arm);
  EXPECT_NEAR((p - Vec3(0.07, 0, 1.5)).norm(), 0.0, 1e-6);
  EXPECT_THROW(ArmModel::from_config(Config::parse("arm.qd_direction = 1 0 0 0 0 0 0\n")),
               std::invalid_argument);
}
