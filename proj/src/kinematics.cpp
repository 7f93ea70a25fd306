#include "mcpilot/kinematics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <unsupported/Eigen/AutoDiff>

namespace mcpilot {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kLimitTol = 1e-9;

template <class S>
using V3 = Eigen::Matrix<S, 3, 1>;
template <class S>
using M3 = Eigen::Matrix<S, 3, 3>;

// Joint axes and origins of every link frame plus the tool tip, world frame.
template <class S>
struct Chain {
  V3<S> tip;
  std::array<V3<S>, kArmDof> axis;
  std::array<V3<S>, kArmDof> origin;
};

template <class S>
Chain<S> evaluate_chain(const Eigen::Matrix<S, kArmDof, 1>& q, const ArmModel& arm) {
  using std::cos;
  using std::sin;
  M3<S> R = M3<S>::Identity();
  const double cy = std::cos(arm.base_yaw), sy = std::sin(arm.base_yaw);
  R(0, 0) = S(cy);
  R(0, 1) = S(-sy);
  R(1, 0) = S(sy);
  R(1, 1) = S(cy);
  V3<S> p = V3<S>::Zero();

  Chain<S> out;
  for (int i = 0; i < kArmDof; ++i) {
    const DhRow& row = arm.dh[i];
    const double ca = std::cos(row.alpha), sa = std::sin(row.alpha);
    const S ct = cos(q(i)), st = sin(q(i));
    M3<S> Ri;
    Ri << ct, -st, S(0.0), st * ca, ct * ca, S(-sa), st * sa, ct * sa, S(ca);
    const V3<S> ti(S(row.a), S(-sa * row.d), S(ca * row.d));
    p = p + R * ti;
    R = R * Ri;
    out.axis[i] = R.col(2);
    out.origin[i] = p;
  }
  const V3<S> flange = p + R.col(2) * S(arm.flange_d);
  out.tip = flange + R * arm.tool_offset.cast<S>();
  return out;
}

template <class S>
Eigen::Matrix<S, 3, kArmDof> chain_jacobian(const Chain<S>& c) {
  Eigen::Matrix<S, 3, kArmDof> J;
  for (int i = 0; i < kArmDof; ++i) J.col(i) = c.axis[i].cross(c.tip - c.origin[i]);
  return J;
}

void check_limits(const Joints& q, const ArmModel& arm) {
  for (int i = 0; i < kArmDof; ++i) {
    if (!std::isfinite(q(i)) || q(i) < arm.limits.q_min(i) - kLimitTol ||
        q(i) > arm.limits.q_max(i) + kLimitTol) {
      throw std::invalid_argument("joint " + std::to_string(i + 1) + " position " +
                                  std::to_string(q(i)) + " outside its limits");
    }
  }
}

Joints joints_from(const std::vector<double>& v, const std::string& key) {
  if (v.size() != kArmDof) {
    throw std::invalid_argument("config: '" + key + "' needs 7 values");
  }
  return Eigen::Map<const Joints>(v.data());
}

}  // namespace

ArmModel ArmModel::panda() {
  ArmModel arm;
  arm.dh = {{{0.0, 0.333, 0.0},
             {0.0, 0.0, -kPi / 2},
             {0.0, 0.316, kPi / 2},
             {0.0825, 0.0, kPi / 2},
             {-0.0825, 0.384, -kPi / 2},
             {0.0, 0.0, kPi / 2},
             {0.088, 0.0, kPi / 2}}};
  arm.flange_d = 0.107;
  arm.base_yaw = kPi;
  arm.q_release << 0.0, -25.0 * kPi / 180.0, 0.0, -kPi / 4, 0.0, kPi, 0.0;
  arm.qd_direction << 0.0, -1.0, 0.0, 1.0, 0.0, 1.0, 0.0;
  arm.limits.q_min << -2.8973, -1.7628, -2.8973, -3.0718, -2.8973, -0.0175, -2.8973;
  arm.limits.q_max << 2.8973, 1.7628, 2.8973, -0.0698, 2.8973, 3.7525, 2.8973;
  arm.limits.qd_max << 2.175, 2.175, 2.175, 2.175, 2.61, 2.61, 2.61;
  arm.limits.qdd_max << 15.0, 7.5, 10.0, 12.5, 15.0, 20.0, 20.0;
  arm.tool_offset = calibrate_tool_offset(arm, Vec3(0.07, 0.0, 1.50));
  return arm;
}

ArmModel ArmModel::from_config(const Config& cfg) {
  ArmModel arm = panda();
  bool geometry_changed = false;
  for (int i = 0; i < kArmDof; ++i) {
    const std::string key = "arm.dh." + std::to_string(i + 1);
    if (!cfg.has(key)) continue;
    const auto row = cfg.get_list(key, {});
    if (row.size() != 3) throw std::invalid_argument("config: '" + key + "' needs a d alpha");
    arm.dh[i] = {row[0], row[1], row[2]};
    geometry_changed = true;
  }
  if (cfg.has("arm.flange_d")) {
    arm.flange_d = cfg.get_double("arm.flange_d", arm.flange_d);
    geometry_changed = true;
  }
  arm.base_yaw = cfg.get_double("arm.base_yaw", arm.base_yaw);
  if (cfg.has("arm.q_release")) {
    arm.q_release = joints_from(cfg.get_list("arm.q_release", {}), "arm.q_release");
    geometry_changed = true;
  }
  if (cfg.has("arm.qd_direction")) {
    arm.qd_direction = joints_from(cfg.get_list("arm.qd_direction", {}), "arm.qd_direction");
  }
  const std::pair<const char*, Joints*> limit_keys[] = {{"arm.q_min", &arm.limits.q_min},
                                                        {"arm.q_max", &arm.limits.q_max},
                                                        {"arm.qd_max", &arm.limits.qd_max},
                                                        {"arm.qdd_max", &arm.limits.qdd_max}};
  for (const auto& [key, dst] : limit_keys) {
    if (cfg.has(key)) *dst = joints_from(cfg.get_list(key, {}), key);
  }
  if (cfg.has("arm.tool_offset")) {
    const auto t = cfg.get_list("arm.tool_offset", {});
    if (t.size() != 3) throw std::invalid_argument("config: 'arm.tool_offset' needs 3 values");
    arm.tool_offset = Vec3(t[0], t[1], t[2]);
  } else if (geometry_changed || cfg.has("arm.base_yaw")) {
    arm.tool_offset = calibrate_tool_offset(arm, Vec3(0.07, 0.0, 1.50));
  }
  arm.validate();
  return arm;
}

void ArmModel::validate() const {
  for (int i : {0, 2, 4, 6}) {
    if (qd_direction(i) != 0.0) {
      throw std::invalid_argument("arm: joints 1, 3, 5 and 7 must not move during the throw");
    }
  }
  for (int i = 0; i < kArmDof; ++i) {
    if (!(limits.q_min(i) < limits.q_max(i)) || !(limits.qd_max(i) > 0.0) ||
        !(limits.qdd_max(i) > 0.0)) {
      throw std::invalid_argument("arm: invalid limits on joint " + std::to_string(i + 1));
    }
  }
  check_limits(q_release, *this);
  if (!(reference_release_velocity(*this).norm() > 0.0)) {
    throw std::invalid_argument("arm: throwing direction produces no tool velocity");
  }
}

Joints ArmModel::release_configuration(double gamma) const {
  Joints q = q_release;
  q(0) = gamma;
  return q;
}

Vec3 calibrate_tool_offset(const ArmModel& arm, const Vec3& tip) {
  ArmModel bare = arm;
  bare.tool_offset.setZero();
  const Joints q = arm.release_configuration(0.0);
  const Vec3 flange = evaluate_chain<double>(q, bare).tip;
  // The flange rotation is the same with or without an offset; recover it
  // from the response to unit offsets along flange x and z.
  bare.tool_offset = Vec3::UnitX();
  const Vec3 ex = evaluate_chain<double>(q, bare).tip - flange;
  bare.tool_offset = Vec3::UnitZ();
  const Vec3 ez = evaluate_chain<double>(q, bare).tip - flange;

  Eigen::Matrix<double, 3, 2> A;
  A << ex, ez;
  const Eigen::Vector2d sol = A.colPivHouseholderQr().solve(tip - flange);
  const Vec3 offset(sol(0), 0.0, sol(1));
  if ((A * sol - (tip - flange)).norm() > 1e-9) {
    throw std::invalid_argument("calibrate_tool_offset: tip not reachable in the flange x-z plane");
  }
  return offset;
}

Vec3 forward_kinematics(const Joints& q, const ArmModel& arm) {
  check_limits(q, arm);
  return evaluate_chain<double>(q, arm).tip;
}

Jacobian analytical_jacobian(const Joints& q, const ArmModel& arm) {
  check_limits(q, arm);
  return chain_jacobian(evaluate_chain<double>(q, arm));
}

Vec3 reference_release_velocity(const ArmModel& arm) {
  const Chain<double> c = evaluate_chain<double>(arm.release_configuration(0.0), arm);
  return chain_jacobian(c) * arm.qd_direction;
}

double max_release_speed(const ArmModel& arm) {
  const double vstar = reference_release_velocity(arm).norm();
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kArmDof; ++i) {
    const double d = std::abs(arm.qd_direction(i));
    if (d > 0.0) best = std::min(best, arm.limits.qd_max(i) * vstar / d);
  }
  return best;
}

ReleaseGeometry release_geometry(const ArmModel& arm) {
  const Vec3 p = evaluate_chain<double>(arm.release_configuration(0.0), arm).tip;
  const Vec3 v = reference_release_velocity(arm);
  ReleaseGeometry g;
  g.l_r = std::hypot(p.x(), p.y());
  g.z_rel = p.z();
  g.alpha = std::atan2(v.z(), std::hypot(v.x(), v.y()));
  return g;
}

JointState release_joint_state(double gamma, double v, const ArmModel& arm) {
  if (!(v >= 0.0)) throw std::invalid_argument("release_joint_state: speed must be >= 0");
  const double vmax = max_release_speed(arm);
  if (v > vmax * (1.0 + 1e-12)) {
    throw std::domain_error("release_joint_state: speed " + std::to_string(v) +
                            " exceeds the joint-velocity bound " + std::to_string(vmax));
  }
  JointState s;
  s.q = arm.release_configuration(gamma);
  check_limits(s.q, arm);
  s.qd = arm.qd_direction * (v / reference_release_velocity(arm).norm());
  return s;
}

Quintic Quintic::fit(double p0, double v0, double a0, double p1, double v1, double a1, double T) {
  if (!(T > 0.0)) throw std::invalid_argument("Quintic::fit: duration must be positive");
  const double h = p1 - p0;
  const double T2 = T * T, T3 = T2 * T;
  Quintic q;
  q.duration = T;
  q.c[0] = p0;
  q.c[1] = v0;
  q.c[2] = 0.5 * a0;
  q.c[3] = (20.0 * h - (8.0 * v1 + 12.0 * v0) * T - (3.0 * a0 - a1) * T2) / (2.0 * T3);
  q.c[4] = (-30.0 * h + (14.0 * v1 + 16.0 * v0) * T + (3.0 * a0 - 2.0 * a1) * T2) / (2.0 * T3 * T);
  q.c[5] = (12.0 * h - 6.0 * (v1 + v0) * T + (a1 - a0) * T2) / (2.0 * T3 * T2);
  return q;
}

double Quintic::pos(double t) const {
  return c[0] + t * (c[1] + t * (c[2] + t * (c[3] + t * (c[4] + t * c[5]))));
}

double Quintic::vel(double t) const {
  return c[1] + t * (2 * c[2] + t * (3 * c[3] + t * (4 * c[4] + t * 5 * c[5])));
}

double Quintic::acc(double t) const {
  return 2 * c[2] + t * (6 * c[3] + t * (12 * c[4] + t * 20 * c[5]));
}

Quintic Quintic::scaled(double k) const {
  Quintic q = *this;
  for (double& ci : q.c) ci *= k;
  return q;
}

void TimingConfig::validate() const {
  if (!(t_release > 0.0) || !(t_stop > 0.0) || !(t_hold >= 0.0)) {
    throw std::invalid_argument("timing: t_release, t_stop must be > 0 and t_hold >= 0");
  }
}

ThrowPlan::ThrowPlan(double gamma, double speed, const ArmModel& arm, const TimingConfig& timing)
    : gamma_(gamma), speed_(speed) {
  timing.validate();
  const JointState rel = release_joint_state(gamma, speed, arm);
  t_release_ = timing.t_release;
  t_stop_ = timing.t_stop;
  t_hold_ = timing.t_hold;
  t_command_ = t_release_;
  q_rel_ = rel.q;
  qd_unit_ = arm.qd_direction / reference_release_velocity(arm).norm();
  // Unit joint speed at release: the rest pose sits half a release-time of
  // travel behind q_rel, giving velocity 3s^2 - 2s^3 (monotone, peak at s = 1).
  unit_accel_ = Quintic::fit(-0.5 * t_release_, 0.0, 0.0, 0.0, 1.0, 0.0, t_release_);
  unit_decel_ = Quintic::fit(0.0, 1.0, 0.0, 0.5 * t_stop_, 0.0, 0.0, t_stop_);
}

void ThrowPlan::set_command_time(double t) {
  if (!(t >= 0.0) || t > duration()) {
    throw std::out_of_range("ThrowPlan: command time " + std::to_string(t) +
                            " outside the trajectory");
  }
  t_command_ = t;
}

namespace {

struct Shape {
  double pos, vel, acc;
};

}  // namespace

JointState ThrowPlan::at(double t) const {
  if (!(t >= -1e-12) || t > duration() + 1e-12) {
    throw std::out_of_range("ThrowPlan: time " + std::to_string(t) + " outside [0, " +
                            std::to_string(duration()) + "]");
  }
  const JointState unit = speed_sensitivity(t);
  return {q_rel_ + speed_ * unit.q, speed_ * unit.qd};
}

JointState ThrowPlan::speed_sensitivity(double t) const {
  Shape s{};
  if (t <= t_release_) {
    const double tt = std::max(t, 0.0);
    s = {unit_accel_.pos(tt), unit_accel_.vel(tt), unit_accel_.acc(tt)};
  } else if (t <= t_release_ + t_stop_) {
    const double tt = t - t_release_;
    s = {unit_decel_.pos(tt), unit_decel_.vel(tt), unit_decel_.acc(tt)};
  } else {
    s = {unit_decel_.pos(t_stop_), 0.0, 0.0};
  }
  return {qd_unit_ * s.pos, qd_unit_ * s.vel};
}

Joints ThrowPlan::acceleration(double t) const {
  double a = 0.0;
  if (t <= t_release_) {
    a = unit_accel_.acc(std::max(t, 0.0));
  } else if (t <= t_release_ + t_stop_) {
    a = unit_decel_.acc(t - t_release_);
  }
  return speed_ * a * qd_unit_;
}

Quintic ThrowPlan::segment(int joint, int which) const {
  if (joint < 0 || joint >= kArmDof || which < 0 || which > 1) {
    throw std::out_of_range("ThrowPlan::segment: bad joint or segment index");
  }
  Quintic q = (which == 0 ? unit_accel_ : unit_decel_).scaled(speed_ * qd_unit_(joint));
  q.c[0] += q_rel_(joint);
  return q;
}

ThrowPlan plan_throw(double gamma, double v, const ArmModel& arm, const TimingConfig& timing) {
  ThrowPlan plan(gamma, v, arm, timing);
  // Peak |velocity| and |acceleration| per segment on a fine grid.
  constexpr int kGrid = 2000;
  for (int j = 0; j < kArmDof; ++j) {
    for (int seg = 0; seg < 2; ++seg) {
      const Quintic q = plan.segment(j, seg);
      double vmax = 0.0, amax = 0.0, qlo = q.pos(0.0), qhi = qlo;
      for (int k = 0; k <= kGrid; ++k) {
        const double t = q.duration * k / kGrid;
        vmax = std::max(vmax, std::abs(q.vel(t)));
        amax = std::max(amax, std::abs(q.acc(t)));
        qlo = std::min(qlo, q.pos(t));
        qhi = std::max(qhi, q.pos(t));
      }
      const std::string name = "joint " + std::to_string(j + 1);
      if (qlo < arm.limits.q_min(j) - kLimitTol || qhi > arm.limits.q_max(j) + kLimitTol) {
        throw std::domain_error("plan_throw: " + name + " leaves its position limits");
      }
      if (vmax > arm.limits.qd_max(j) * (1.0 + 1e-12)) {
        throw std::domain_error("plan_throw: " + name + " exceeds its velocity limit");
      }
      if (amax > arm.limits.qdd_max(j) * (1.0 + 1e-12)) {
        throw std::domain_error("plan_throw: " + name + " exceeds its acceleration limit (" +
                                std::to_string(amax) + " > " +
                                std::to_string(arm.limits.qdd_max(j)) + ")");
      }
    }
  }
  return plan;
}

ReleaseState release_state_h(const ThrowPlan& plan, double t, const ArmModel& arm) {
  const JointState js = plan.at(t);
  const Chain<double> c = evaluate_chain<double>(js.q, arm);
  return {c.tip, chain_jacobian(c) * js.qd};
}

ReleaseStateSensitivity release_state_with_sensitivity(const ThrowPlan& plan, double t,
                                                       const ArmModel& arm) {
  using AD = Eigen::AutoDiffScalar<Eigen::Matrix<double, 1, 1>>;
  const JointState js = plan.at(t);
  const JointState dv = plan.speed_sensitivity(t);
  Eigen::Matrix<AD, kArmDof, 1> q, qd;
  for (int i = 0; i < kArmDof; ++i) {
    q(i) = AD(js.q(i), Eigen::Matrix<double, 1, 1>(dv.q(i)));
    qd(i) = AD(js.qd(i), Eigen::Matrix<double, 1, 1>(dv.qd(i)));
  }
  const Chain<AD> c = evaluate_chain<AD>(q, arm);
  const V3<AD> vel = chain_jacobian(c) * qd;

  ReleaseStateSensitivity out;
  for (int k = 0; k < 3; ++k) {
    out.value.p(k) = c.tip(k).value();
    out.value.v(k) = vel(k).value();
    out.dp_dspeed(k) = c.tip(k).derivatives()(0);
    out.dv_dspeed(k) = vel(k).derivatives()(0);
  }
  return out;
}

}  // namespace mcpilot
