#pragma once

#include <iosfwd>

#include <Eigen/Core>

#include "mcpilot/core.hpp"

namespace mcpilot {

/// Squashed RBF release-speed policy
///   pi(P) = u_M / 2 * (tanh(sum_i w_i / u_M * exp(-sum_d (a_id - P_d)^2 / Sigma_d)) + 1),
/// with `shape` holding the diagonal of Sigma.
///
/// The flat parameter vector is [w (N), centers row by row (3N), log Sigma (3)].
class RbfPolicy {
 public:
  RbfPolicy() = default;
  RbfPolicy(Eigen::VectorXd weights, Eigen::MatrixXd centers, Vec3 shape, double u_M);

  double operator()(const Vec3& P) const;
  double operator()(const TargetPoint& P) const { return (*this)(P.vec()); }

  /// Value plus d pi / d theta (flat layout) and d pi / d P.
  double eval_gradient(const Vec3& P, Eigen::VectorXd* dtheta, Vec3* dP = nullptr) const;

  /// Speeds for every row of P (M x 3).
  Eigen::VectorXd eval_batch(const Eigen::MatrixXd& P) const;
  /// sum_m c_m * d pi(P_m) / d theta.
  Eigen::VectorXd vjp_batch(const Eigen::MatrixXd& P, const Eigen::VectorXd& c) const;

  Eigen::Index num_bases() const { return weights_.size(); }
  Eigen::Index num_params() const { return 4 * num_bases() + 3; }
  double u_M() const { return u_M_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  const Eigen::MatrixXd& centers() const { return centers_; }
  const Vec3& shape() const { return shape_; }

  Eigen::VectorXd params() const;
  void set_params(const Eigen::VectorXd& theta);

  void save(std::ostream& out) const;
  static RbfPolicy load(std::istream& in);

 private:
  Eigen::VectorXd weights_;
  Eigen::MatrixXd centers_;  // N x 3
  Vec3 shape_ = Vec3::Constant(0.5);
  double u_M_ = 3.5;
};

/// Weights uniform in [-u_M, u_M]; centers uniform over
/// x in [0, l_M], y in [-l_M sin(gamma_M), l_M sin(gamma_M)] at z = z_P;
/// shape 1/2 on every axis.
RbfPolicy init_policy(const TargetDomain& domain, double u_M, int N_b, RngStream& rng);

/// Per-weight factor: 0 for dropped bases, 1 / (1 - p) for survivors.
struct DropoutMask {
  Eigen::VectorXd scale;

  static DropoutMask identity(Eigen::Index n);
  /// Throws std::invalid_argument unless 0 <= p <= 0.9.
  static DropoutMask sample(Eigen::Index n, double p, RngStream& rng);

  RbfPolicy apply(const RbfPolicy& policy) const;
  /// Maps a gradient taken at the masked policy back to the unmasked weights.
  void pull_back(Eigen::VectorXd& grad) const;
};

RbfPolicy apply_dropout(const RbfPolicy& policy, double p, RngStream& rng);

}  // namespace mcpilot
