#pragma once

#include <vector>

#include <Eigen/Core>

#include "mcpilot/core.hpp"

namespace mcpilot {

/// Drag-free release speed that lands on P from the fixed release geometry.
/// Throws std::domain_error when no ballistic solution exists (target
/// behind the release point or above the reachable parabola).
double ballistic_speed(const TargetPoint& P, const ReleaseGeometry& geom,
                       const PhysicalConstants& constants);

/// Ballistic baseline clamped to the speed cap.
struct BallisticPolicy {
  ReleaseGeometry geom;
  PhysicalConstants constants;
  double u_M = 3.5;

  double operator()(const TargetPoint& P) const;
  /// True when the unclamped speed exceeds u_M.
  bool infeasible(const TargetPoint& P) const;
};

/// Landing points (inputs) and the speeds that produced them (targets).
struct RegressionSet {
  std::vector<Vec3> inputs;
  std::vector<double> speeds;

  std::size_t size() const { return inputs.size(); }
  void validate() const;
};

/// ReLU network, N_h hidden layers of equal width, output squashed into
/// (0, u_M) the same way as the RBF policy.
class Mlp {
 public:
  Mlp() = default;
  Mlp(int hidden_layers, int width, double u_M);

  double operator()(const Vec3& x) const;
  double operator()(const TargetPoint& P) const { return (*this)(P.vec()); }
  Eigen::VectorXd forward(const Eigen::MatrixXd& X) const;

  int hidden_layers() const { return static_cast<int>(W_.size()) - 1; }
  double u_M() const { return u_M_; }

  std::vector<Eigen::MatrixXd>& weights() { return W_; }
  std::vector<Eigen::VectorXd>& biases() { return b_; }
  const std::vector<Eigen::MatrixXd>& weights() const { return W_; }
  const std::vector<Eigen::VectorXd>& biases() const { return b_; }

  /// Per-feature input standardization applied before the first layer.
  Eigen::Vector3d in_mean = Eigen::Vector3d::Zero();
  Eigen::Vector3d in_scale = Eigen::Vector3d::Ones();

 private:
  friend struct MlpTrainer;
  std::vector<Eigen::MatrixXd> W_;  // layer k maps rows of width W_[k].rows() to W_[k].cols()
  std::vector<Eigen::VectorXd> b_;
  double u_M_ = 3.5;
};

struct MlpTrainConfig {
  int hidden_layers = 2;
  int width = 200;
  int epochs = 2000;
  double lr = 1e-3;
  double u_M = 3.5;
};

struct MlpTrainResult {
  Mlp model;
  std::vector<double> loss;  // mean squared error per epoch, before its update
  double final_loss = 0.0;
};

/// Full-batch adaptive-moment descent on the mean squared speed error.
MlpTrainResult train_mlp(const RegressionSet& data, const MlpTrainConfig& cfg, RngStream& rng);

inline double mlp_policy(const Mlp& model, const TargetPoint& P) { return model(P); }

}  // namespace mcpilot
