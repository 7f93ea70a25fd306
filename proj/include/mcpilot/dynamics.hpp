#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "mcpilot/core.hpp"
#include "mcpilot/gp.hpp"
#include "mcpilot/world.hpp"

namespace mcpilot {

/// Features fed to the velocity-change GPs.
enum class GPInput {
  Velocity,   // v only; free flight does not depend on position
  FullState,  // (p, v)
};

Eigen::Index gp_input_dim(GPInput input);
const char* to_string(GPInput input);
GPInput gp_input_from_string(const std::string& s);

/// Inputs (one row per transition) and outputs v_{t+1} - v_t (one column
/// per velocity component).
struct GPDataset {
  Eigen::MatrixXd X;
  Eigen::MatrixXd Y;

  Eigen::Index size() const { return X.rows(); }
  void validate() const;
};

/// Original trajectory followed by N_a copies rotated about z by angles
/// drawn uniformly in [-pi, pi].
std::vector<Trajectory> augment_trajectory(const Trajectory& traj, int N_a, RngStream& rng);

/// Throws std::invalid_argument if any trajectory is not sampled every T_s.
GPDataset build_dataset(const std::vector<Trajectory>& trajectories, GPInput input, double T_s);

/// Evenly strided subset of at most max_points rows (all rows if smaller).
GPDataset subsample(const GPDataset& data, Eigen::Index max_points);

/// Three independent GPs over the velocity change per sampling period plus
/// the constant-acceleration position update.
class DynamicsModel {
 public:
  DynamicsModel() = default;
  DynamicsModel(std::array<GaussianProcess, 3> gps, double T_s, GPInput input);

  /// Fits one GP per output column, each starting from default_hyper.
  static DynamicsModel fit(const GPDataset& data, double T_s, GPInput input,
                           const FitOptions& opts = {});

  struct OneStep {
    Eigen::Matrix<double, 6, 1> mean;
    Eigen::Matrix<double, 6, 6> cov;
    Vec3 delta_mean;
    Vec3 delta_var;
  };
  /// Predictive distribution of the next state. `dt` rescales the learned
  /// change (constant acceleration over the step); negative means T_s.
  OneStep one_step(const CartesianState& x, double dt = -1.0) const;

  struct Batch {
    Eigen::MatrixXd mean;   // M x 3, E[Delta]
    Eigen::MatrixXd var;    // M x 3, Var[Delta]
    Eigen::MatrixXd dmean;  // tangents, when requested
    Eigen::MatrixXd dvar;
  };
  /// Posterior of Delta for M states, optionally with directional
  /// derivatives along (dP, dV).
  Batch predict(const Eigen::MatrixXd& P, const Eigen::MatrixXd& V) const;
  Batch predict(const Eigen::MatrixXd& P, const Eigen::MatrixXd& V, const Eigen::MatrixXd& dP,
                const Eigen::MatrixXd& dV) const;

  const GaussianProcess& gp(int k) const { return gps_.at(k); }
  double T_s() const { return T_s_; }
  GPInput input() const { return input_; }

  /// Plain-text form: hyperparameters, input selector and training set.
  void save(std::ostream& out) const;
  static DynamicsModel load(std::istream& in);

 private:
  Eigen::MatrixXd features(const Eigen::MatrixXd& P, const Eigen::MatrixXd& V) const;

  std::array<GaussianProcess, 3> gps_;
  double T_s_ = 0.01;
  GPInput input_ = GPInput::Velocity;
};

}  // namespace mcpilot
