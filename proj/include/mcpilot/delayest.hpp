#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mcpilot/core.hpp"
#include "mcpilot/dynamics.hpp"
#include "mcpilot/kinematics.hpp"
#include "mcpilot/mcopt.hpp"
#include "mcpilot/world.hpp"

namespace mcpilot {

struct BOConfig {
  double a_lo = -0.3, a_hi = 0.3;
  double b_lo = 0.0, b_hi = 0.01;
  double sigma = 2.0;  // UCB exploration weight
  int n_init = 10;
  int n_iter = 40;
  int starts = 32;     // multi-start count for the acquisition search
  int M_d = 10;        // particles per recorded throw
  double horizon = 1.0;

  void validate() const;
};

struct BOSample {
  int iter = 0;
  double a = 0.0, b = 0.0, F = 0.0;
};

struct BOResult {
  double a = 0.0, b = 0.0, F = 0.0;
  std::vector<BOSample> trace;
  std::vector<std::string> warnings;
};

/// Mean over recorded throws of the mean horizontal distance between the
/// model-predicted particle landings and the recorded landing. Each throw
/// uses M_d particles released at t_command + U(a, a + b). `rng` is taken by
/// value, so repeated calls share the same draws.
double delay_objective(double a, double b, const std::vector<ThrowRecord>& records,
                       const DynamicsModel& model, const ArmModel& arm,
                       const TimingConfig& timing, int M_d, double horizon, RngStream rng);

/// Root mean square horizontal distance between each record's landing and
/// the mean of its M_d predicted particle landings.
double landing_rmse(double a, double b, const std::vector<ThrowRecord>& records,
                    const DynamicsModel& model, const ArmModel& arm, const TimingConfig& timing,
                    int M_d, double horizon, RngStream rng);

/// GP-UCB minimisation over the (a, b) box: n_init uniform samples, then
/// n_iter points minimising mean - sigma * std of the surrogate. Returns the
/// best observed sample, earliest first on ties.
BOResult bo_minimize(const std::function<double(double, double)>& objective,
                     const BOConfig& cfg, RngStream& rng);

/// t_r - a_hat. Throws std::invalid_argument if a_hat > t_r.
double recompute_command_time(double t_r, double a_hat);

}  // namespace mcpilot
