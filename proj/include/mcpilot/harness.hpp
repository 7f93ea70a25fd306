#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mcpilot/baselines.hpp"
#include "mcpilot/config.hpp"
#include "mcpilot/core.hpp"
#include "mcpilot/delayest.hpp"
#include "mcpilot/dynamics.hpp"
#include "mcpilot/kinematics.hpp"
#include "mcpilot/mcopt.hpp"
#include "mcpilot/policy.hpp"
#include "mcpilot/world.hpp"

namespace mcpilot {

/// Every experiment parameter, with simulation defaults.
struct Settings {
  TargetDomain domain;
  CostParams cost;
  double u_M = 3.5;
  ArmModel arm = ArmModel::panda();
  TimingConfig timing;
  WorldConfig world;

  int M = 400;
  double horizon = 1.0;
  int N_b = 250;
  int N_exp = 5;
  int N_a = 0;
  int N_test = 10;
  int trials = 1;
  int eval_targets = 100;
  bool use_delay_model = true;

  GPInput gp_input = GPInput::Velocity;
  FitOptions gp_fit;
  int gp_max_points = 200;

  OptimizeConfig opt;
  double lr = 0.01;
  BOConfig bo;

  MlpTrainConfig mlp;
  int mlp_samples = 60;

  std::uint64_t seed = 1;

  /// Release geometry implied by the arm.
  ReleaseGeometry geometry() const { return release_geometry(arm); }
  RolloutConfig rollout_config(const DelayModel& delay, bool use_delay) const;
  void validate() const;

  /// Reads every documented key; unknown keys are left for the caller to
  /// report through Config::unused_keys().
  static Settings from_config(const Config& cfg);
};

struct EvalRow {
  TargetPoint target;
  Vec3 landing = Vec3::Zero();
  double speed = 0.0;
  double error = 0.0;
  bool hit = false;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  double accuracy = 0.0;
  double median_error = 0.0;
  double p90_error = 0.0;

  /// Recomputes accuracy and quantiles from the rows.
  void summarize();
  double recount_accuracy() const;
};

using SpeedPolicy = std::function<double(const TargetPoint&)>;

/// Targets drawn from the evaluation stream of `rng`.
std::vector<TargetPoint> evaluation_targets(const TargetDomain& domain, int n, RngStream rng);

/// One throw per target through the world with the given command time.
EvalReport evaluate(const SpeedPolicy& policy, const World& world, const TimingConfig& timing,
                    double t_command, const std::vector<TargetPoint>& targets, RngStream& rng,
                    std::vector<ThrowRecord>* records = nullptr);

/// Everything the learner knows. It is built only from ThrowRecords, never
/// from the world's configuration.
struct LearnerState {
  std::vector<ThrowRecord> records;
  std::vector<Trajectory> trajectories;  // records plus their rotated copies
  std::optional<DynamicsModel> model;
  DelayModel delay;
  bool delay_estimated = false;
  std::optional<RbfPolicy> policy;
  BOResult bo;
  std::vector<TraceRow> opt_trace;
  std::vector<std::string> log;
};

/// Adds a record and its N_a rotated copies to the dataset.
void add_record(LearnerState& state, const ThrowRecord& rec, int N_a, RngStream& rng);

/// N_exp ballistic throws toward sampled targets.
void explore(const Settings& s, const World& world, LearnerState& state, RngStream& rng);
void fit_model(const Settings& s, LearnerState& state);
/// Bayesian optimisation of (a, b) followed by the command-time update.
void estimate_delay(const Settings& s, LearnerState& state, RngStream& rng);
void optimize(const Settings& s, LearnerState& state, RngStream& rng);
/// N_test throws with the current policy; records join the dataset.
EvalReport test_throws(const Settings& s, const World& world, LearnerState& state,
                       RngStream& rng);

/// Command time the current learner would use.
double command_time(const Settings& s, const LearnerState& state);

/// One outer iteration: fit, delay estimation, policy update, test throws.
/// Exploration runs first when the dataset is empty.
EvalReport run_trial(const Settings& s, const World& world, LearnerState& state, int trial,
                     RngStream& rng);

/// Full pipeline from an empty dataset over s.trials trials.
LearnerState run_pipeline(const Settings& s, const World& world, RngStream& rng);

/// Re-optimises the policy for a new target domain from the stored model and
/// delay estimate. Performs no world interaction.
RbfPolicy retarget(const Settings& s, const LearnerState& state, const TargetDomain& domain,
                   RngStream& rng, std::vector<TraceRow>* trace = nullptr);

/// Random-direction, random-speed throws for the network baseline.
RegressionSet collect_regression_set(const Settings& s, const World& world, int n,
                                     RngStream& rng);

}  // namespace mcpilot
