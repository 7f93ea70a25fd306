#include "mcpilot/harness.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mcpilot {

RolloutConfig Settings::rollout_config(const DelayModel& delay, bool use_delay) const {
  RolloutConfig rc;
  rc.M = M;
  rc.horizon = horizon;
  rc.l_c = cost.l_c;
  rc.domain = domain;
  rc.timing = timing;
  rc.delay = delay;
  rc.use_delay = use_delay;
  return rc;
}

void Settings::validate() const {
  domain.validate();
  if (!(cost.l_c > 0.0)) throw std::invalid_argument("settings: l_c must be positive");
  if (!(u_M > 0.0) || u_M > max_release_speed(arm)) {
    throw std::invalid_argument("settings: u_M must be positive and reachable by the arm");
  }
  arm.validate();
  timing.validate();
  world.validate();
  bo.validate();
  if (M < 1 || N_b < 1 || N_exp < 1 || N_a < 0 || N_test < 0 || trials < 1 ||
      eval_targets < 1 || opt.N_opt < 0 || gp_max_points < 2) {
    throw std::invalid_argument("settings: counts out of range");
  }
  if (!(horizon > 0.0) || !(lr > 0.0)) {
    throw std::invalid_argument("settings: horizon and lr must be positive");
  }
  if (!(opt.dropout >= 0.0) || opt.dropout > 0.9) {
    throw std::invalid_argument("settings: dropout must lie in [0, 0.9]");
  }
}

Settings Settings::from_config(const Config& cfg) {
  Settings s;
  s.domain.l_min = cfg.get_double("l_m", s.domain.l_min);
  s.domain.l_max = cfg.get_double("l_M", s.domain.l_max);
  s.domain.gamma_max = cfg.get_double("gamma_M", s.domain.gamma_max);
  s.domain.z = cfg.get_double("z_P", s.domain.z);
  s.cost.l_c = cfg.get_double("l_c", s.cost.l_c);
  s.u_M = cfg.get_double("u_M", s.u_M);

  s.arm = ArmModel::from_config(cfg);
  if (cfg.has("l_r") || cfg.has("z_rel")) {
    const ReleaseGeometry g = release_geometry(s.arm);
    const Vec3 tip(cfg.get_double("l_r", g.l_r), 0.0, cfg.get_double("z_rel", g.z_rel));
    s.arm.tool_offset = calibrate_tool_offset(s.arm, tip);
  }
  if (cfg.has("alpha")) {
    const double alpha = cfg.get_double("alpha", 0.0);
    const double intrinsic = release_geometry(s.arm).alpha;
    if (std::abs(alpha - intrinsic) > 1e-6) {
      throw std::invalid_argument("config: alpha is fixed by the arm's throwing direction (" +
                                  std::to_string(intrinsic) + " rad)");
    }
  }
  s.timing.t_release = cfg.get_double("t_r", s.timing.t_release);
  s.timing.t_stop = cfg.get_double("t_stop", s.timing.t_stop);
  s.timing.t_hold = cfg.get_double("t_hold", s.timing.t_hold);
  s.world = WorldConfig::from_config(cfg);

  s.M = static_cast<int>(cfg.get_int("M", s.M));
  s.horizon = cfg.get_double("T", s.horizon);
  s.N_b = static_cast<int>(cfg.get_int("N_b", s.N_b));
  s.N_exp = static_cast<int>(cfg.get_int("N_exp", s.N_exp));
  s.N_a = static_cast<int>(cfg.get_int("N_a", s.N_a));
  s.N_test = static_cast<int>(cfg.get_int("N_test", s.N_test));
  s.trials = static_cast<int>(cfg.get_int("trials", s.trials));
  s.eval_targets = static_cast<int>(cfg.get_int("eval_targets", s.eval_targets));
  s.use_delay_model = cfg.get_bool("use_delay_model", s.use_delay_model);

  s.gp_input = gp_input_from_string(cfg.get_string("gp_input", to_string(s.gp_input)));
  s.gp_fit.iters = static_cast<int>(cfg.get_int("gp_iters", s.gp_fit.iters));
  s.gp_fit.relative_noise_floor = cfg.get_double("gp_noise_floor", s.gp_fit.relative_noise_floor);
  s.gp_max_points = static_cast<int>(cfg.get_int("gp_max_points", s.gp_max_points));

  s.opt.N_opt = static_cast<int>(cfg.get_int("N_opt", s.opt.N_opt));
  s.opt.dropout = cfg.get_double("dropout", s.opt.dropout);
  s.opt.dropout_off_fraction = cfg.get_double("dropout_off_fraction", s.opt.dropout_off_fraction);
  s.opt.resample_period = static_cast<int>(cfg.get_int("resample_period", s.opt.resample_period));
  s.lr = cfg.get_double("lr", s.lr);

  s.bo.a_lo = cfg.get_double("bo.a_lo", s.bo.a_lo);
  s.bo.a_hi = cfg.get_double("bo.a_hi", s.bo.a_hi);
  s.bo.b_lo = cfg.get_double("bo.b_lo", s.bo.b_lo);
  s.bo.b_hi = cfg.get_double("bo.b_hi", s.bo.b_hi);
  s.bo.sigma = cfg.get_double("bo.sigma", s.bo.sigma);
  s.bo.n_init = static_cast<int>(cfg.get_int("bo.n_init", s.bo.n_init));
  s.bo.n_iter = static_cast<int>(cfg.get_int("bo.n_iter", s.bo.n_iter));
  s.bo.starts = static_cast<int>(cfg.get_int("bo.starts", s.bo.starts));
  s.bo.M_d = static_cast<int>(cfg.get_int("M_d", s.bo.M_d));
  s.bo.horizon = s.horizon;

  s.mlp.hidden_layers = static_cast<int>(cfg.get_int("mlp.hidden_layers", s.mlp.hidden_layers));
  s.mlp.width = static_cast<int>(cfg.get_int("mlp.width", s.mlp.width));
  s.mlp.epochs = static_cast<int>(cfg.get_int("mlp.epochs", s.mlp.epochs));
  s.mlp.lr = cfg.get_double("mlp.lr", s.mlp.lr);
  s.mlp.u_M = s.u_M;
  s.mlp_samples = static_cast<int>(cfg.get_int("mlp.samples", s.mlp_samples));

  s.seed = cfg.get_u64("seed", s.seed);
  s.validate();
  return s;
}

void EvalReport::summarize() {
  if (rows.empty()) {
    accuracy = median_error = p90_error = 0.0;
    return;
  }
  accuracy = recount_accuracy();
  std::vector<double> e;
  e.reserve(rows.size());
  for (const auto& r : rows) e.push_back(r.error);
  std::sort(e.begin(), e.end());
  auto q = [&](double p) {
    const double pos = p * static_cast<double>(e.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, e.size() - 1);
    return e[lo] + (pos - static_cast<double>(lo)) * (e[hi] - e[lo]);
  };
  median_error = q(0.5);
  p90_error = q(0.9);
}

double EvalReport::recount_accuracy() const {
  if (rows.empty()) return 0.0;
  const auto hits = std::count_if(rows.begin(), rows.end(), [](const EvalRow& r) { return r.hit; });
  return static_cast<double>(hits) / static_cast<double>(rows.size());
}

std::vector<TargetPoint> evaluation_targets(const TargetDomain& domain, int n, RngStream rng) {
  std::vector<TargetPoint> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.push_back(sample_target(domain, rng));
  return out;
}

namespace {

ThrowRecord throw_at(const World& world, const TimingConfig& timing, const TargetPoint& P,
                     double speed, double t_command, RngStream& rng) {
  const double gamma = polar_of_target(P).second;
  ThrowPlan plan = plan_throw(gamma, speed, world.arm(), timing);
  plan.set_command_time(t_command);
  return world.execute(plan, P, rng);
}

}  // namespace

EvalReport evaluate(const SpeedPolicy& policy, const World& world, const TimingConfig& timing,
                    double t_command, const std::vector<TargetPoint>& targets, RngStream& rng,
                    std::vector<ThrowRecord>* records) {
  EvalReport rep;
  rep.rows.reserve(targets.size());
  for (const auto& P : targets) {
    const ThrowRecord rec = throw_at(world, timing, P, policy(P), t_command, rng);
    rep.rows.push_back({P, rec.landing, rec.speed, rec.error(), rec.hit});
    if (records) records->push_back(rec);
  }
  rep.summarize();
  return rep;
}

void add_record(LearnerState& state, const ThrowRecord& rec, int N_a, RngStream& rng) {
  state.records.push_back(rec);
  for (auto& tr : augment_trajectory(rec.samples, N_a, rng)) {
    state.trajectories.push_back(std::move(tr));
  }
}

void explore(const Settings& s, const World& world, LearnerState& state, RngStream& rng) {
  RngStream targets = rng.derive(StreamPurpose::Exploration);
  RngStream throws = rng.derive(StreamPurpose::World);
  RngStream aug = rng.derive(StreamPurpose::Augmentation);
  const BallisticPolicy baseline{s.geometry(), s.world.constants, s.u_M};
  for (int j = 0; j < s.N_exp; ++j) {
    const TargetPoint P = sample_target(s.domain, targets);
    const ThrowRecord rec =
        throw_at(world, s.timing, P, baseline(P), s.timing.t_release, throws);
    add_record(state, rec, s.N_a, aug);
  }
  state.log.push_back("explore: " + std::to_string(s.N_exp) + " baseline throws");
}

void fit_model(const Settings& s, LearnerState& state) {
  if (state.trajectories.empty()) throw std::runtime_error("fit_model: no trajectories");
  const GPDataset full = build_dataset(state.trajectories, s.gp_input, s.world.T_s);
  const GPDataset data = subsample(full, s.gp_max_points);
  state.model = DynamicsModel::fit(data, s.world.T_s, s.gp_input, s.gp_fit);
  state.log.push_back("fit-model: " + std::to_string(data.size()) + " of " +
                      std::to_string(full.size()) + " transitions");
}

void estimate_delay(const Settings& s, LearnerState& state, RngStream& rng) {
  if (!state.model) throw std::runtime_error("estimate_delay: model not fitted");
  const RngStream objective_rng = rng.derive(StreamPurpose::DelayObjective);
  RngStream bo_rng = rng.derive(StreamPurpose::BayesOpt);
  const auto& records = state.records;
  const DynamicsModel& model = *state.model;
  auto F = [&](double a, double b) {
    return delay_objective(a, b, records, model, s.arm, s.timing, s.bo.M_d, s.bo.horizon,
                           objective_rng);
  };
  state.bo = bo_minimize(F, s.bo, bo_rng);
  state.delay.a = state.bo.a;
  state.delay.b = state.bo.b;
  state.delay.t_command = recompute_command_time(s.timing.t_release, state.bo.a);
  state.delay_estimated = true;
  for (const auto& w : state.bo.warnings) state.log.push_back("estimate-delay: " + w);
  state.log.push_back("estimate-delay: a=" + std::to_string(state.delay.a) +
                      " b=" + std::to_string(state.delay.b));
}

double command_time(const Settings& s, const LearnerState& state) {
  return s.use_delay_model && state.delay_estimated ? state.delay.t_command : s.timing.t_release;
}

void optimize(const Settings& s, LearnerState& state, RngStream& rng) {
  if (!state.model) throw std::runtime_error("optimize: model not fitted");
  if (!state.policy) {
    RngStream init_rng = rng.derive(StreamPurpose::PolicyInit);
    state.policy = init_policy(s.domain, s.u_M, s.N_b, init_rng);
  }
  const bool use_delay = s.use_delay_model && state.delay_estimated;
  const RolloutConfig rc = s.rollout_config(state.delay, use_delay);
  OptState opt;
  opt.lr = s.lr;
  const OptimizeResult res = optimize_policy(*state.policy, *state.model, rc, opt, s.opt, s.arm, rng);
  state.policy = res.policy;
  state.opt_trace = res.trace;
  for (const auto& w : res.warnings) state.log.push_back("optimize: " + w);
}

EvalReport test_throws(const Settings& s, const World& world, LearnerState& state,
                       RngStream& rng) {
  if (!state.policy) throw std::runtime_error("test_throws: no policy");
  RngStream targets_rng = rng.derive(StreamPurpose::Evaluation);
  RngStream throws = rng.derive(StreamPurpose::World);
  RngStream aug = rng.derive(StreamPurpose::Augmentation);
  const std::vector<TargetPoint> targets = evaluation_targets(s.domain, s.N_test, targets_rng);
  const RbfPolicy& policy = *state.policy;
  std::vector<ThrowRecord> recs;
  EvalReport rep = evaluate([&](const TargetPoint& P) { return policy(P); }, world, s.timing,
                            command_time(s, state), targets, throws, &recs);
  for (const auto& r : recs) add_record(state, r, s.N_a, aug);
  return rep;
}

EvalReport run_trial(const Settings& s, const World& world, LearnerState& state, int trial,
                     RngStream& rng) {
  RngStream trial_rng = rng.derive(static_cast<std::uint64_t>(1000 + trial));
  auto phase = [&](const char* name, auto&& fn) {
    try {
      return fn();
    } catch (const std::exception& e) {
      throw std::runtime_error("trial " + std::to_string(trial) + ", " + name + ": " + e.what());
    }
  };
  if (state.records.empty()) {
    phase("explore", [&] {
      RngStream r = trial_rng.derive(StreamPurpose::Exploration);
      explore(s, world, state, r);
      return 0;
    });
  }
  phase("fit-model", [&] {
    fit_model(s, state);
    return 0;
  });
  if (s.use_delay_model) {
    phase("estimate-delay", [&] {
      RngStream r = trial_rng.derive(StreamPurpose::BayesOpt);
      estimate_delay(s, state, r);
      return 0;
    });
  }
  phase("optimize", [&] {
    RngStream r = trial_rng.derive(StreamPurpose::Particles);
    optimize(s, state, r);
    return 0;
  });
  return phase("test", [&] {
    RngStream r = trial_rng.derive(StreamPurpose::Evaluation);
    return test_throws(s, world, state, r);
  });
}

LearnerState run_pipeline(const Settings& s, const World& world, RngStream& rng) {
  LearnerState state;
  for (int t = 0; t < s.trials; ++t) run_trial(s, world, state, t, rng);
  return state;
}

RbfPolicy retarget(const Settings& s, const LearnerState& state, const TargetDomain& domain,
                   RngStream& rng, std::vector<TraceRow>* trace) {
  if (!state.model || !state.policy) {
    throw std::runtime_error("retarget: needs a fitted model and an optimized policy");
  }
  Settings moved = s;
  moved.domain = domain;
  const bool use_delay = s.use_delay_model && state.delay_estimated;
  const RolloutConfig rc = moved.rollout_config(state.delay, use_delay);
  OptState opt;
  opt.lr = s.lr;
  const OptimizeResult res =
      optimize_policy(*state.policy, *state.model, rc, opt, s.opt, s.arm, rng);
  if (trace) *trace = res.trace;
  return res.policy;
}

RegressionSet collect_regression_set(const Settings& s, const World& world, int n,
                                     RngStream& rng) {
  RngStream pick = rng.derive(StreamPurpose::Exploration);
  RngStream throws = rng.derive(StreamPurpose::World);
  const ReleaseGeometry g = s.geometry();
  // Slowest useful speed: a ballistic throw a little short of the domain.
  const double l_lo = g.l_r + 0.8 * (s.domain.l_min - g.l_r);
  const double v_lo = ballistic_speed({l_lo, 0.0, s.domain.z}, g, s.world.constants);
  RegressionSet data;
  for (int i = 0; i < n; ++i) {
    const double gamma = pick.uniform(-s.domain.gamma_max, s.domain.gamma_max);
    const double v = pick.uniform(v_lo, s.u_M);
    const TargetPoint aim{std::cos(gamma), std::sin(gamma), s.domain.z};
    const ThrowRecord rec = throw_at(world, s.timing, aim, v, s.timing.t_release, throws);
    data.inputs.push_back(rec.landing);
    data.speeds.push_back(v);
  }
  return data;
}

}  // namespace mcpilot
