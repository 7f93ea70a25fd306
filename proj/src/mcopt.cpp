#include "mcpilot/mcopt.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mcpilot {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void DelayModel::validate() const {
  if (!(b >= 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    throw std::invalid_argument("delay model: need finite a and b >= 0");
  }
  if (!(t_command >= 0.0)) throw std::invalid_argument("delay model: negative command time");
}

void RolloutConfig::validate() const {
  if (M < 1) throw std::invalid_argument("rollout: M must be >= 1");
  if (!(horizon > 0.0)) throw std::invalid_argument("rollout: horizon must be positive");
  if (!(l_c > 0.0)) throw std::invalid_argument("rollout: l_c must be positive");
  domain.validate();
  timing.validate();
  delay.validate();
}

int RolloutConfig::steps(double T_s) const {
  return static_cast<int>(std::lround(horizon / T_s));
}

NoiseBatch NoiseBatch::sample(const TargetDomain& domain, int M, int steps, RngStream& rng) {
  NoiseBatch nb;
  nb.targets.resize(M, 3);
  for (int m = 0; m < M; ++m) nb.targets.row(m) = sample_target(domain, rng).vec().transpose();
  nb.delay_u.resize(M);
  for (int m = 0; m < M; ++m) nb.delay_u(m) = rng.uniform(0.0, 1.0);
  nb.eps.assign(steps, MatrixXd(M, 3));
  for (auto& e : nb.eps) {
    for (int m = 0; m < M; ++m) {
      for (int k = 0; k < 3; ++k) e(m, k) = rng.normal();
    }
  }
  return nb;
}

ParticleSet make_particles(const MatrixXd& targets, const VectorXd& speed,
                           const VectorXd& t_release, const ArmModel& arm,
                           const TimingConfig& timing) {
  const Eigen::Index M = targets.rows();
  if (speed.size() != M || t_release.size() != M) {
    throw std::invalid_argument("make_particles: size mismatch");
  }
  ParticleSet ps;
  ps.P.resize(M, 3);
  ps.V.resize(M, 3);
  ps.dP.resize(M, 3);
  ps.dV.resize(M, 3);
  ps.targets = targets;
  ps.speed = speed;
  ps.t_release = t_release;
  ps.freeze_step.assign(M, -1);
  for (Eigen::Index m = 0; m < M; ++m) {
    const double gamma = std::atan2(targets(m, 1), targets(m, 0));
    const ThrowPlan plan(gamma, speed(m), arm, timing);
    const ReleaseStateSensitivity s = release_state_with_sensitivity(plan, t_release(m), arm);
    ps.P.row(m) = s.value.p.transpose();
    ps.V.row(m) = s.value.v.transpose();
    ps.dP.row(m) = s.dp_dspeed.transpose();
    ps.dV.row(m) = s.dv_dspeed.transpose();
  }
  return ps;
}

VectorXd release_times(const RolloutConfig& cfg, const NoiseBatch& noise) {
  if (!cfg.use_delay) return VectorXd::Constant(noise.M(), cfg.timing.t_release);
  return (cfg.delay.t_command + cfg.delay.a + cfg.delay.b * noise.delay_u.array()).matrix();
}

ParticleSet init_particles(const RbfPolicy& policy, const RolloutConfig& cfg,
                           const NoiseBatch& noise, const ArmModel& arm) {
  return make_particles(noise.targets, policy.eval_batch(noise.targets),
                        release_times(cfg, noise), arm, cfg.timing);
}

void rollout(ParticleSet& ps, const DynamicsModel& model, const NoiseBatch& noise,
             bool tangents, std::vector<MatrixXd>* history) {
  const int M = ps.M();
  if (noise.M() != M) throw std::invalid_argument("rollout: noise batch size mismatch");
  const double Ts = model.T_s();
  std::vector<int> active;
  active.reserve(M);
  for (int m = 0; m < M; ++m) {
    if (ps.freeze_step[m] < 0) active.push_back(m);
  }
  if (history) history->clear();

  MatrixXd P, V, dP, dV;
  for (int step = 0; step < static_cast<int>(noise.eps.size()); ++step) {
    const int A = static_cast<int>(active.size());
    if (A > 0) {
      P.resize(A, 3);
      V.resize(A, 3);
      if (tangents) {
        dP.resize(A, 3);
        dV.resize(A, 3);
      }
      for (int i = 0; i < A; ++i) {
        P.row(i) = ps.P.row(active[i]);
        V.row(i) = ps.V.row(active[i]);
        if (tangents) {
          dP.row(i) = ps.dP.row(active[i]);
          dV.row(i) = ps.dV.row(active[i]);
        }
      }
      const DynamicsModel::Batch b =
          tangents ? model.predict(P, V, dP, dV) : model.predict(P, V);
      std::vector<int> still;
      still.reserve(A);
      for (int i = 0; i < A; ++i) {
        const int m = active[i];
        for (int k = 0; k < 3; ++k) {
          const double sd = std::sqrt(b.var(i, k));
          const double e = noise.eps[step](m, k);
          const double delta = b.mean(i, k) + sd * e;
          ps.P(m, k) += Ts * ps.V(m, k) + 0.5 * Ts * delta;
          ps.V(m, k) += delta;
          if (tangents) {
            const double dsd = sd > 0.0 ? b.dvar(i, k) / (2.0 * sd) : 0.0;
            const double ddelta = b.dmean(i, k) + dsd * e;
            ps.dP(m, k) += Ts * ps.dV(m, k) + 0.5 * Ts * ddelta;
            ps.dV(m, k) += ddelta;
          }
        }
        if (ps.P(m, 2) <= ps.targets(m, 2)) {
          ps.freeze_step[m] = step + 1;
        } else {
          still.push_back(m);
        }
      }
      active.swap(still);
    }
    if (history) history->push_back(ps.P);
  }
}

double objective(const MatrixXd& P, const MatrixXd& targets, double l_c) {
  if (P.rows() < 1) throw std::invalid_argument("objective: need at least one particle");
  double sum = 0.0;
  for (Eigen::Index m = 0; m < P.rows(); ++m) {
    sum += saturated_cost(P.row(m).transpose(), TargetPoint::from(targets.row(m).transpose()),
                          l_c);
  }
  return sum / static_cast<double>(P.rows());
}

double objective_value(const RbfPolicy& policy, const DynamicsModel& model,
                       const RolloutConfig& cfg, const NoiseBatch& noise, const ArmModel& arm) {
  ParticleSet ps = init_particles(policy, cfg, noise, arm);
  rollout(ps, model, noise, false);
  return objective(ps.P, ps.targets, cfg.l_c);
}

ObjectiveGradient objective_gradient(const RbfPolicy& policy, const DynamicsModel& model,
                                     const RolloutConfig& cfg, const NoiseBatch& noise,
                                     const ArmModel& arm) {
  ParticleSet ps = init_particles(policy, cfg, noise, arm);
  rollout(ps, model, noise, true);
  const int M = ps.M();
  ObjectiveGradient out;
  out.J = objective(ps.P, ps.targets, cfg.l_c);

  // d cost_m / d speed_m, then chain through the policy in one batch.
  VectorXd c(M);
  for (int m = 0; m < M; ++m) {
    const double dx = ps.P(m, 0) - ps.targets(m, 0);
    const double dy = ps.P(m, 1) - ps.targets(m, 1);
    const double e = std::exp(-(dx * dx + dy * dy) / cfg.l_c);
    c(m) = e * 2.0 / cfg.l_c * (dx * ps.dP(m, 0) + dy * ps.dP(m, 1)) / M;
  }
  out.grad = policy.vjp_batch(ps.targets, c);
  for (Eigen::Index k = 0; k < out.grad.size(); ++k) {
    if (!std::isfinite(out.grad(k))) {
      throw std::runtime_error("objective_gradient: non-finite component at parameter " +
                               std::to_string(k));
    }
  }
  return out;
}

void OptState::update(VectorXd& theta, const VectorXd& grad) {
  if (m.size() != theta.size()) {
    m = VectorXd::Zero(theta.size());
    v = VectorXd::Zero(theta.size());
    step = 0;
  }
  ++step;
  m = beta1 * m + (1.0 - beta1) * grad;
  v = beta2 * v + (1.0 - beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
  theta.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
}

OptimizeResult optimize_policy(const RbfPolicy& init, const DynamicsModel& model,
                               const RolloutConfig& cfg, OptState& opt,
                               const OptimizeConfig& ocfg, const ArmModel& arm, RngStream& rng) {
  cfg.validate();
  if (ocfg.N_opt < 0 || ocfg.resample_period < 1) {
    throw std::invalid_argument("optimize_policy: need N_opt >= 0 and resample_period >= 1");
  }
  OptimizeResult out;
  out.policy = init;
  if (ocfg.N_opt == 0) return out;

  RngStream particle_rng = rng.derive(StreamPurpose::Particles);
  RngStream dropout_rng = rng.derive(StreamPurpose::Dropout);
  const int steps = cfg.steps(model.T_s());
  const int dropout_until =
      static_cast<int>(std::lround(ocfg.N_opt * (1.0 - ocfg.dropout_off_fraction)));

  VectorXd theta = init.params();
  RbfPolicy current = init;
  NoiseBatch noise;
  int above = 0;
  bool warned = false;
  for (int it = 0; it < ocfg.N_opt; ++it) {
    if (it % ocfg.resample_period == 0) {
      noise = NoiseBatch::sample(cfg.domain, cfg.M, steps, particle_rng);
    }
    const double p = it < dropout_until ? ocfg.dropout : 0.0;
    const DropoutMask mask = p > 0.0 ? DropoutMask::sample(current.num_bases(), p, dropout_rng)
                                     : DropoutMask::identity(current.num_bases());
    ObjectiveGradient og = objective_gradient(mask.apply(current), model, cfg, noise, arm);
    mask.pull_back(og.grad);
    out.trace.push_back({it, og.J, og.grad.norm(), p});

    above = og.J > 0.999 ? above + 1 : 0;
    if (above >= 100 && !warned) {
      out.warnings.push_back("objective above 0.999 for 100 consecutive steps (step " +
                             std::to_string(it) + ")");
      warned = true;
    }
    opt.update(theta, og.grad);
    current.set_params(theta);
  }
  out.policy = current;
  return out;
}

}  // namespace mcpilot
