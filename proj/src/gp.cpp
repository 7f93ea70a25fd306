#include "mcpilot/gp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

namespace mcpilot {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void GPHyper::validate(Eigen::Index dim) const {
  if (!(lambda > 0.0) || !(noise > 0.0) || !std::isfinite(lambda) || !std::isfinite(noise)) {
    throw std::invalid_argument("GP hyperparameters: lambda and noise must be positive");
  }
  if (lengthscales.size() != dim) {
    throw std::invalid_argument("GP hyperparameters: one lengthscale per input dimension");
  }
  for (Eigen::Index d = 0; d < dim; ++d) {
    if (!(lengthscales(d) > 0.0) || !std::isfinite(lengthscales(d))) {
      throw std::invalid_argument("GP hyperparameters: lengthscales must be positive");
    }
  }
}

VectorXd GPHyper::to_log() const {
  VectorXd t(lengthscales.size() + 2);
  t(0) = std::log(lambda);
  t.segment(1, lengthscales.size()) = lengthscales.array().log().matrix();
  t(t.size() - 1) = std::log(noise);
  return t;
}

GPHyper GPHyper::from_log(const VectorXd& t) {
  GPHyper h;
  h.lambda = std::exp(t(0));
  h.lengthscales = t.segment(1, t.size() - 2).array().exp().matrix();
  h.noise = std::exp(t(t.size() - 1));
  return h;
}

double se_kernel(const VectorXd& a, const VectorXd& b, const GPHyper& h) {
  if (a.size() != b.size() || a.size() != h.lengthscales.size()) {
    throw std::invalid_argument("se_kernel: dimension mismatch");
  }
  const double r2 = ((a - b).array().square() / h.lengthscales.array()).sum();
  return h.lambda * h.lambda * std::exp(-r2);
}

MatrixXd se_kernel_matrix(const MatrixXd& A, const MatrixXd& B, const GPHyper& h) {
  if (A.cols() != B.cols() || A.cols() != h.lengthscales.size()) {
    throw std::invalid_argument("se_kernel_matrix: dimension mismatch");
  }
  MatrixXd K(A.rows(), B.rows());
  const Eigen::ArrayXd inv = h.lengthscales.array().inverse();
  const double l2 = h.lambda * h.lambda;
  for (Eigen::Index j = 0; j < B.rows(); ++j) {
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
      const double r2 = ((A.row(i) - B.row(j)).array().square() * inv.transpose()).sum();
      K(i, j) = l2 * std::exp(-r2);
    }
  }
  return K;
}

GaussianProcess::GaussianProcess(MatrixXd X, VectorXd y, GPHyper hyper)
    : X_(std::move(X)), y_(std::move(y)), hyper_(std::move(hyper)) {
  if (X_.rows() < 1 || X_.rows() != y_.size()) {
    throw std::invalid_argument("GaussianProcess: need matching, nonempty X and y");
  }
  hyper_.validate(X_.cols());
  const Eigen::Index n = X_.rows();
  MatrixXd gamma = se_kernel_matrix(X_, X_, hyper_);
  gamma.diagonal().array() += hyper_.noise;

  bool ok = false;
  for (double jitter = 0.0; jitter <= 1e-6 * (1.0 + 1e-9);
       jitter = (jitter == 0.0 ? 1e-10 : jitter * 10.0)) {
    MatrixXd g = gamma;
    g.diagonal().array() += jitter;
    Eigen::LLT<MatrixXd> llt(g);
    if (llt.info() == Eigen::Success && (llt.matrixLLT().diagonal().array() > 0.0).all()) {
      L_ = llt.matrixL();
      alpha_ = llt.solve(y_);
      Ginv_ = llt.solve(MatrixXd::Identity(n, n));
      jitter_ = jitter;
      ok = true;
      break;
    }
  }
  if (!ok) {
    throw std::runtime_error("GaussianProcess: Gram matrix not positive definite after jitter");
  }
  Xs_ = X_.array().rowwise() / hyper_.lengthscales.transpose().array();
  xs_sq_ = (X_.array() * Xs_.array()).rowwise().sum();
}

Posterior GaussianProcess::predict(const VectorXd& x) const {
  if (x.size() != dim()) throw std::invalid_argument("GaussianProcess::predict: bad input size");
  const MatrixXd k = se_kernel_matrix(x.transpose(), X_, hyper_);
  Posterior p;
  p.mean = (k * alpha_)(0);
  const double quad = (k * Ginv_ * k.transpose())(0, 0);
  p.var = std::max(hyper_.lambda * hyper_.lambda - quad, 0.0);
  return p;
}

GaussianProcess::Batch GaussianProcess::predict_batch(const MatrixXd& Xq) const {
  return predict_batch(Xq, MatrixXd());
}

GaussianProcess::Batch GaussianProcess::predict_batch(const MatrixXd& Xq,
                                                      const MatrixXd& dXq) const {
  if (Xq.cols() != dim()) throw std::invalid_argument("predict_batch: bad input width");
  const bool tangent = dXq.size() > 0;
  if (tangent && (dXq.rows() != Xq.rows() || dXq.cols() != Xq.cols())) {
    throw std::invalid_argument("predict_batch: tangent shape mismatch");
  }
  const double l2 = hyper_.lambda * hyper_.lambda;
  const Eigen::ArrayXd inv = hyper_.lengthscales.array().inverse();

  const MatrixXd Xqs = Xq.array().rowwise() * inv.transpose();
  const VectorXd q_sq = (Xq.array() * Xqs.array()).rowwise().sum();
  MatrixXd K = -2.0 * (Xq * Xs_.transpose());
  K.colwise() += q_sq;
  K.rowwise() += xs_sq_.transpose();
  K = (l2 * (-K.array().max(0.0)).exp()).matrix();

  Batch out;
  out.mean = K * alpha_;
  const MatrixXd V = K * Ginv_;
  out.var = (l2 - (K.array() * V.array()).rowwise().sum()).max(0.0).matrix();
  if (!tangent) return out;

  const MatrixXd U = dXq.array().rowwise() * inv.transpose();
  const VectorXd a = (Xq.array() * U.array()).rowwise().sum();
  // d k_ij = -2 k_ij sum_d (x_id - X_jd) dx_id / lengthscale_d
  MatrixXd diff = -(U * X_.transpose());
  diff.colwise() += a;
  const MatrixXd dK = (-2.0 * K.array() * diff.array()).matrix();
  out.dmean = dK * alpha_;
  out.dvar = (-2.0 * (V.array() * dK.array()).rowwise().sum()).matrix();
  for (Eigen::Index i = 0; i < out.var.size(); ++i) {
    if (out.var(i) == 0.0) out.dvar(i) = 0.0;
  }
  return out;
}

double GaussianProcess::log_marginal_likelihood() const {
  const double n = static_cast<double>(size());
  return -0.5 * y_.dot(alpha_) - L_.diagonal().array().log().sum() -
         0.5 * n * std::log(2.0 * std::numbers::pi);
}

VectorXd GaussianProcess::log_marginal_likelihood_gradient() const {
  const Eigen::Index n = size(), D = dim();
  MatrixXd K = se_kernel_matrix(X_, X_, hyper_);
  const MatrixXd W = alpha_ * alpha_.transpose() - Ginv_;
  const MatrixXd WK = (W.array() * K.array()).matrix();
  VectorXd g(D + 2);
  g(0) = WK.sum();
  for (Eigen::Index d = 0; d < D; ++d) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < n; ++i) {
        const double diff = X_(i, d) - X_(j, d);
        acc += WK(i, j) * diff * diff;
      }
    }
    g(1 + d) = 0.5 * acc / hyper_.lengthscales(d);
  }
  g(D + 1) = 0.5 * W.trace() * hyper_.noise;
  return g;
}

namespace {

double stddev(const Eigen::VectorXd& v) {
  if (v.size() < 2) return 0.0;
  const double m = v.mean();
  return std::sqrt((v.array() - m).square().sum() / static_cast<double>(v.size() - 1));
}

}  // namespace

GPHyper default_hyper(const MatrixXd& X, const VectorXd& y) {
  GPHyper h;
  h.lengthscales.resize(X.cols());
  for (Eigen::Index d = 0; d < X.cols(); ++d) {
    const double s = stddev(X.col(d));
    h.lengthscales(d) = s > 1e-12 ? s : 1.0;
  }
  const double sy = stddev(y);
  h.lambda = sy > 1e-12 ? sy : std::max(y.cwiseAbs().maxCoeff(), 1e-6);
  h.noise = 0.01 * h.lambda * h.lambda;
  return h;
}

GPHyper fit_hyperparameters(const MatrixXd& X, const VectorXd& y, const GPHyper& init,
                            const FitOptions& opts) {
  if (X.rows() < 2) throw std::invalid_argument("fit_hyperparameters: need at least 2 points");
  init.validate(X.cols());

  const double var_y = y.size() > 1 ? std::pow(stddev(y), 2) : 0.0;
  const double noise_floor = std::max(opts.relative_noise_floor * var_y, 1e-14);
  const Eigen::Index P = X.cols() + 2;
  VectorXd lo = VectorXd::Constant(P, std::log(1e-6));
  VectorXd hi = VectorXd::Constant(P, std::log(1e6));
  lo(0) = std::log(1e-8);
  lo(P - 1) = std::log(noise_floor);
  hi(P - 1) = std::log(1e4);

  auto score = [&](const VectorXd& theta, VectorXd* grad) -> double {
    try {
      GaussianProcess gp(X, y, GPHyper::from_log(theta));
      const double v = gp.log_marginal_likelihood();
      if (grad) *grad = gp.log_marginal_likelihood_gradient();
      return v;
    } catch (const std::runtime_error&) {
      return -std::numeric_limits<double>::infinity();
    }
  };

  VectorXd theta = init.to_log();
  VectorXd grad;
  double best = score(theta, &grad);
  if (!std::isfinite(best) || !grad.allFinite()) {
    throw std::runtime_error("fit_hyperparameters: log marginal likelihood not finite at init");
  }
  if (opts.iters <= 0) return init;

  // Sign-based per-coordinate steps in log space; a step is kept only if it
  // raises the likelihood, otherwise all step sizes shrink.
  VectorXd step = VectorXd::Constant(P, 0.1);
  VectorXd prev_sign = VectorXd::Zero(P);
  for (int it = 0; it < opts.iters; ++it) {
    VectorXd sign = grad.array().sign().matrix();
    for (Eigen::Index k = 0; k < P; ++k) {
      if (sign(k) * prev_sign(k) > 0) step(k) = std::min(step(k) * 1.2, 1.0);
      if (sign(k) * prev_sign(k) < 0) step(k) *= 0.5;
    }
    VectorXd cand = (theta + step.cwiseProduct(sign)).cwiseMax(lo).cwiseMin(hi);
    VectorXd cand_grad;
    const double s = score(cand, &cand_grad);
    if (s > best && cand_grad.allFinite()) {
      theta = cand;
      best = s;
      grad = cand_grad;
      prev_sign = sign;
    } else {
      step *= 0.5;
      prev_sign.setZero();
      if (step.maxCoeff() < 1e-9) break;
    }
  }
  return GPHyper::from_log(theta);
}

}  // namespace mcpilot
