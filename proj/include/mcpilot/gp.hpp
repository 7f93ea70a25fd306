#pragma once

#include <Eigen/Core>

namespace mcpilot {

/// Squared-exponential kernel hyperparameters,
/// k(x, x') = lambda^2 exp(-sum_d (x_d - x'_d)^2 / lengthscales_d).
struct GPHyper {
  double lambda = 1.0;
  Eigen::VectorXd lengthscales;  // diagonal of Lambda
  double noise = 1e-2;           // sigma^2

  void validate(Eigen::Index dim) const;

  /// [log lambda, log lengthscales..., log noise]
  Eigen::VectorXd to_log() const;
  static GPHyper from_log(const Eigen::VectorXd& theta);
};

double se_kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const GPHyper& h);

/// Cross-covariance matrix between the rows of A and the rows of B.
Eigen::MatrixXd se_kernel_matrix(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                 const GPHyper& h);

struct Posterior {
  double mean = 0.0;
  double var = 0.0;
};

/// Exact GP regression with a zero prior mean.
class GaussianProcess {
 public:
  GaussianProcess() = default;
  /// Rows of X are inputs. Factorizes K + (sigma^2 + jitter) I, escalating
  /// jitter from 1e-10 to 1e-6; throws std::runtime_error if all fail.
  GaussianProcess(Eigen::MatrixXd X, Eigen::VectorXd y, GPHyper hyper);

  Posterior predict(const Eigen::VectorXd& x) const;

  struct Batch {
    Eigen::VectorXd mean, var;
    Eigen::VectorXd dmean, dvar;  // directional derivatives, when requested
  };
  /// Posterior at every row of Xq.
  Batch predict_batch(const Eigen::MatrixXd& Xq) const;
  /// Same, plus the derivative of mean and variance along the per-row
  /// input tangents dXq.
  Batch predict_batch(const Eigen::MatrixXd& Xq, const Eigen::MatrixXd& dXq) const;

  double log_marginal_likelihood() const;
  /// Gradient of the log marginal likelihood in log-hyperparameters.
  Eigen::VectorXd log_marginal_likelihood_gradient() const;

  const GPHyper& hyper() const { return hyper_; }
  const Eigen::MatrixXd& X() const { return X_; }
  const Eigen::VectorXd& y() const { return y_; }
  double jitter() const { return jitter_; }
  Eigen::Index size() const { return X_.rows(); }
  Eigen::Index dim() const { return X_.cols(); }

 private:
  Eigen::MatrixXd X_;
  Eigen::VectorXd y_;
  GPHyper hyper_;
  double jitter_ = 0.0;
  Eigen::MatrixXd L_;      // lower Cholesky factor of Gamma
  Eigen::VectorXd alpha_;  // Gamma^-1 y
  Eigen::MatrixXd Ginv_;   // Gamma^-1
  Eigen::MatrixXd Xs_;     // X with columns divided by lengthscales
  Eigen::VectorXd xs_sq_;  // row-wise sum over d of X_d^2 / lengthscales_d
};

/// Initial hyperparameters: lengthscales = input standard deviations,
/// lambda = output standard deviation, noise = 1% of the output variance.
GPHyper default_hyper(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

struct FitOptions {
  int iters = 500;
  /// Lower bound on sigma^2, relative to the output variance.
  double relative_noise_floor = 1e-3;
};

/// Gradient ascent on the log marginal likelihood over log-hyperparameters.
/// Only improving steps are accepted, so the result never scores below
/// `init`. Throws std::runtime_error when the likelihood at init is not finite.
GPHyper fit_hyperparameters(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                            const GPHyper& init, const FitOptions& opts = {});

}  // namespace mcpilot
