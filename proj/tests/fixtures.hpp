#pragma once

// Shared builders for the unit tests and the acceptance binary.

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "mcpilot/harness.hpp"

namespace mcpilot::testing {

/// Sim defaults with the planted delay switched on or off.
inline Settings sim_settings(bool drag = true, bool delay = true) {
  Settings s;
  s.world.drag.enabled = drag;
  if (!delay) {
    s.world.delay_lo = 0.0;
    s.world.delay_hi = 0.0;
  }
  return s;
}

/// Learner state after exploration and model fitting.
inline LearnerState explored_state(const Settings& s, const World& world, std::uint64_t seed) {
  RngStream rng(seed);
  LearnerState st;
  explore(s, world, st, rng);
  fit_model(s, st);
  return st;
}

/// Three-basis policy, M = 8, T = 0.2 s. Targets sit close to the arm so
/// the particles are still near them when the short horizon ends and the
/// cost gradient is far from saturation.
struct MicroProblem {
  RbfPolicy policy;
  RolloutConfig cfg;
  NoiseBatch noise;
};

inline MicroProblem micro_problem(const DynamicsModel& model, std::uint64_t seed) {
  MicroProblem p;
  Eigen::VectorXd w(3);
  w << 1.2, -0.7, 2.0;
  Eigen::MatrixXd A(3, 3);
  A << 0.35, 0.1, -1.0, 0.5, -0.2, -1.0, 0.45, 0.25, -1.0;
  p.policy = RbfPolicy(w, A, Vec3(0.3, 0.5, 0.5), 3.5);
  p.cfg.M = 8;
  p.cfg.horizon = 0.2;
  p.cfg.domain.l_min = 0.3;
  p.cfg.domain.l_max = 0.6;
  p.cfg.delay = {0.01, 0.01, 0.48};
  p.cfg.use_delay = true;
  RngStream rng(seed);
  p.noise = NoiseBatch::sample(p.cfg.domain, p.cfg.M, p.cfg.steps(model.T_s()), rng);
  return p;
}

/// max |analytic - central FD| / max |central FD| over every policy parameter.
inline double micro_gradient_error(const DynamicsModel& model, const ArmModel& arm,
                                   std::uint64_t seed, double h = 1e-4) {
  MicroProblem p = micro_problem(model, seed);
  const ObjectiveGradient g = objective_gradient(p.policy, model, p.cfg, p.noise, arm);
  const Eigen::VectorXd theta = p.policy.params();
  Eigen::VectorXd fd(theta.size());
  RbfPolicy probe = p.policy;
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    Eigen::VectorXd tp = theta, tm = theta;
    tp(j) += h;
    tm(j) -= h;
    probe.set_params(tp);
    const double fp = objective_value(probe, model, p.cfg, p.noise, arm);
    probe.set_params(tm);
    const double fm = objective_value(probe, model, p.cfg, p.noise, arm);
    fd(j) = (fp - fm) / (2 * h);
  }
  return (g.grad - fd).cwiseAbs().maxCoeff() / fd.cwiseAbs().maxCoeff();
}

}  // namespace mcpilot::testing
