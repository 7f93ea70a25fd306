#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "mcpilot/core.hpp"
#include "mcpilot/dynamics.hpp"
#include "mcpilot/kinematics.hpp"
#include "mcpilot/policy.hpp"

namespace mcpilot {

/// Release-delay belief: detachment happens at t_command + U(a, a + b).
struct DelayModel {
  double a = 0.0;
  double b = 0.0;
  double t_command = 0.48;

  void validate() const;
};

struct RolloutConfig {
  int M = 400;
  double horizon = 1.0;  // T [s]
  double l_c = 0.1;
  TargetDomain domain;
  TimingConfig timing;
  DelayModel delay;
  bool use_delay = true;

  void validate() const;
  int steps(double T_s) const;
};

/// Every random draw of one Monte Carlo evaluation, sampled up front so the
/// objective is a deterministic function of the policy parameters.
struct NoiseBatch {
  Eigen::MatrixXd targets;          // M x 3
  Eigen::VectorXd delay_u;          // M, uniform in [0, 1]
  std::vector<Eigen::MatrixXd> eps;  // steps x (M x 3), standard normal

  /// Targets first, then delay fractions, then the step noise.
  static NoiseBatch sample(const TargetDomain& domain, int M, int steps, RngStream& rng);
  int M() const { return static_cast<int>(targets.rows()); }
};

/// Particle states (rows) with their derivative with respect to the
/// particle's own commanded speed.
struct ParticleSet {
  Eigen::MatrixXd P, V;    // M x 3
  Eigen::MatrixXd dP, dV;  // M x 3, d / d speed
  Eigen::MatrixXd targets;  // M x 3
  Eigen::VectorXd speed;
  Eigen::VectorXd t_release;
  std::vector<int> freeze_step;  // -1 while airborne

  int M() const { return static_cast<int>(P.rows()); }
};

/// Release states for given targets, speeds and actual release times.
ParticleSet make_particles(const Eigen::MatrixXd& targets, const Eigen::VectorXd& speed,
                           const Eigen::VectorXd& t_release, const ArmModel& arm,
                           const TimingConfig& timing);

/// Actual release time of each particle under cfg (t_r when delays are off).
Eigen::VectorXd release_times(const RolloutConfig& cfg, const NoiseBatch& noise);

/// Policy speeds at the sampled targets, released at the sampled times.
ParticleSet init_particles(const RbfPolicy& policy, const RolloutConfig& cfg,
                           const NoiseBatch& noise, const ArmModel& arm);

/// Propagates particles through the model for noise.eps.size() steps.
/// A particle whose height reaches the target plane (z <= target z) is held
/// from that step on. Tangents are propagated when `tangents` is set.
/// `history`, if given, receives the positions after every step.
void rollout(ParticleSet& ps, const DynamicsModel& model, const NoiseBatch& noise,
             bool tangents, std::vector<Eigen::MatrixXd>* history = nullptr);

/// Mean saturated cost of the terminal positions against their targets.
double objective(const Eigen::MatrixXd& P, const Eigen::MatrixXd& targets, double l_c);

struct ObjectiveGradient {
  double J = 0.0;
  Eigen::VectorXd grad;  // flat policy layout
};

/// Sampled objective and its exact pathwise gradient for fixed noise.
ObjectiveGradient objective_gradient(const RbfPolicy& policy, const DynamicsModel& model,
                                     const RolloutConfig& cfg, const NoiseBatch& noise,
                                     const ArmModel& arm);

/// Sampled objective only.
double objective_value(const RbfPolicy& policy, const DynamicsModel& model,
                       const RolloutConfig& cfg, const NoiseBatch& noise, const ArmModel& arm);

/// Adaptive-moment optimizer state.
struct OptState {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long long step = 0;
  Eigen::VectorXd m, v;

  /// theta <- theta - lr * mhat / (sqrt(vhat) + eps)
  void update(Eigen::VectorXd& theta, const Eigen::VectorXd& grad);
};

struct OptimizeConfig {
  int N_opt = 1500;
  double dropout = 0.25;
  /// Dropout is switched off for this final fraction of the iterations.
  double dropout_off_fraction = 0.25;
  /// Redraw targets/delays every `resample_period` iterations (1 = always).
  int resample_period = 1;
};

struct TraceRow {
  int step = 0;
  double J = 0.0;
  double grad_norm = 0.0;
  double dropout = 0.0;
};

struct OptimizeResult {
  RbfPolicy policy;
  std::vector<TraceRow> trace;
  std::vector<std::string> warnings;
};

OptimizeResult optimize_policy(const RbfPolicy& init, const DynamicsModel& model,
                               const RolloutConfig& cfg, OptState& opt,
                               const OptimizeConfig& ocfg, const ArmModel& arm, RngStream& rng);

}  // namespace mcpilot
