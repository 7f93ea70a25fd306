#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>

#include "mcpilot/config.hpp"
#include "mcpilot/core.hpp"

namespace mcpilot {

inline constexpr int kArmDof = 7;
using Joints = Eigen::Matrix<double, kArmDof, 1>;
using Jacobian = Eigen::Matrix<double, 3, kArmDof>;

/// One link in the modified (Craig) Denavit-Hartenberg convention:
/// T_i = RotX(alpha) * TransX(a) * RotZ(q_i) * TransZ(d).
struct DhRow {
  double a = 0.0;
  double d = 0.0;
  double alpha = 0.0;
};

struct JointLimits {
  Joints q_min;
  Joints q_max;
  Joints qd_max;
  Joints qdd_max;
};

/// Serial 7-DoF arm with a rigid tool and the throwing-motion template.
struct ArmModel {
  std::array<DhRow, kArmDof> dh{};
  double flange_d = 0.107;      // flange offset along the last joint axis
  Vec3 tool_offset = Vec3::Zero();  // tool tip in the flange frame
  double base_yaw = 0.0;        // mounting rotation of the base about world z
  Joints q_release = Joints::Zero();  // release configuration, joint 1 replaced by gamma
  Joints qd_direction = Joints::Zero();  // joint-velocity direction at release
  JointLimits limits{};

  /// Manufacturer DH table and limits for the Panda arm, base mounted facing
  /// the throwing direction, tool tip calibrated onto (0.07, 0, 1.50).
  static ArmModel panda();

  /// Overrides from `arm.*` keys (dh rows, flange, tool offset, limits).
  static ArmModel from_config(const Config& cfg);

  void validate() const;

  /// Release configuration with the base joint set to the bearing gamma.
  Joints release_configuration(double gamma) const;
};

/// Solves for the (x, z) flange-frame tool offset that puts the tool tip at
/// `tip` when the arm is in its release configuration with gamma = 0.
Vec3 calibrate_tool_offset(const ArmModel& arm, const Vec3& tip);

/// Tool-tip position. Throws std::invalid_argument outside the joint limits.
Vec3 forward_kinematics(const Joints& q, const ArmModel& arm);

/// d forward_kinematics / dq (position rows only).
Jacobian analytical_jacobian(const Joints& q, const ArmModel& arm);

struct JointState {
  Joints q;
  Joints qd;
};

/// Release configuration and joint velocities giving Cartesian speed v
/// along the arm's intrinsic throwing direction.
JointState release_joint_state(double gamma, double v, const ArmModel& arm);

/// J(q_rel) qd_direction at gamma = 0; its norm maps joint to Cartesian speed.
Vec3 reference_release_velocity(const ArmModel& arm);

/// Largest speed reachable without exceeding joint velocity limits.
double max_release_speed(const ArmModel& arm);

/// Release radius, height and vertical angle implied by the arm.
ReleaseGeometry release_geometry(const ArmModel& arm);

/// Degree-5 polynomial on [0, duration], coefficients in local time.
struct Quintic {
  std::array<double, 6> c{};
  double duration = 0.0;

  static Quintic fit(double p0, double v0, double a0, double p1, double v1, double a1,
                     double duration);
  double pos(double t) const;
  double vel(double t) const;
  double acc(double t) const;
  Quintic scaled(double k) const;
};

struct TimingConfig {
  double t_release = 0.48;  // nominal release time [s]
  double t_stop = 0.30;     // deceleration time after release [s]
  double t_hold = 0.10;     // stationary tail after the arm stops [s]

  void validate() const;
};

/// Joint trajectory for one throw. Each moving joint follows two quintic
/// segments, rest -> release (position q_rel, velocity qd_rel, zero
/// acceleration) on [0, t_release] and release -> rest on
/// [t_release, t_release + t_stop], then holds still for t_hold.
///
/// All boundary data are linear in the commanded speed, so the profile is
/// stored per unit speed: q(t) = q_rel + speed * unit(t).
class ThrowPlan {
 public:
  ThrowPlan() = default;
  ThrowPlan(double gamma, double speed, const ArmModel& arm, const TimingConfig& timing);

  double gamma() const { return gamma_; }
  double speed() const { return speed_; }
  double t_release() const { return t_release_; }
  double t_stop() const { return t_stop_; }
  double t_hold() const { return t_hold_; }
  double duration() const { return t_release_ + t_stop_ + t_hold_; }

  /// Gripper-open command time; defaults to the nominal release time.
  double t_command() const { return t_command_; }
  void set_command_time(double t);

  const Joints& q_release() const { return q_rel_; }
  Joints qd_release() const { return speed_ * qd_unit_; }

  /// Joint position/velocity/acceleration at time t in [0, duration()].
  JointState at(double t) const;
  Joints acceleration(double t) const;
  /// d q / d speed and d qd / d speed at time t.
  JointState speed_sensitivity(double t) const;

  /// Actual (speed-scaled) segment polynomial of one joint, in absolute
  /// joint coordinates. segment 0 accelerates, segment 1 decelerates.
  Quintic segment(int joint, int which) const;

 private:
  double gamma_ = 0.0;
  double speed_ = 0.0;
  double t_release_ = 0.48;
  double t_stop_ = 0.30;
  double t_hold_ = 0.10;
  double t_command_ = 0.48;
  Joints q_rel_ = Joints::Zero();
  Joints qd_unit_ = Joints::Zero();
  Quintic unit_accel_;
  Quintic unit_decel_;
};

/// Builds and limit-checks the plan. Throws std::domain_error naming the
/// first joint whose position, velocity or acceleration limit is violated.
ThrowPlan plan_throw(double gamma, double v, const ArmModel& arm, const TimingConfig& timing);

struct ReleaseState {
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
};

/// Object state if it detaches at time t along the plan.
ReleaseState release_state_h(const ThrowPlan& plan, double t, const ArmModel& arm);

struct ReleaseStateSensitivity {
  ReleaseState value;
  Vec3 dp_dspeed = Vec3::Zero();
  Vec3 dv_dspeed = Vec3::Zero();
};

/// release_state_h and its derivative with respect to the commanded speed
/// at fixed t.
ReleaseStateSensitivity release_state_with_sensitivity(const ThrowPlan& plan, double t,
                                                       const ArmModel& arm);

}  // namespace mcpilot
