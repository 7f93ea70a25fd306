#include "mcpilot/policy.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace mcpilot {

using Eigen::MatrixXd;
using Eigen::VectorXd;

RbfPolicy::RbfPolicy(VectorXd weights, MatrixXd centers, Vec3 shape, double u_M)
    : weights_(std::move(weights)), centers_(std::move(centers)), shape_(shape), u_M_(u_M) {
  if (!(u_M_ > 0.0)) throw std::invalid_argument("RbfPolicy: u_M must be positive");
  if (centers_.rows() != weights_.size() || centers_.cols() != 3) {
    throw std::invalid_argument("RbfPolicy: need one 3-d center per weight");
  }
  if (!(shape_.array() > 0.0).all()) {
    throw std::invalid_argument("RbfPolicy: shape diagonal must be positive");
  }
}

double RbfPolicy::operator()(const Vec3& P) const { return eval_gradient(P, nullptr); }

double RbfPolicy::eval_gradient(const Vec3& P, VectorXd* dtheta, Vec3* dP) const {
  const Eigen::Index N = num_bases();
  const Vec3 S = shape_.cwiseInverse();
  double s = 0.0;
  VectorXd phi(N);
  for (Eigen::Index i = 0; i < N; ++i) {
    const Vec3 diff = centers_.row(i).transpose() - P;
    phi(i) = std::exp(-(S.array() * diff.array().square()).sum());
    s += weights_(i) / u_M_ * phi(i);
  }
  const double th = std::tanh(s);
  const double value = 0.5 * u_M_ * (th + 1.0);
  const double ds = 0.5 * u_M_ * (1.0 - th * th);
  if (dtheta) {
    dtheta->setZero(num_params());
    for (Eigen::Index i = 0; i < N; ++i) {
      const Vec3 diff = centers_.row(i).transpose() - P;
      const double wi = weights_(i) / u_M_ * phi(i);
      (*dtheta)(i) = ds * phi(i) / u_M_;
      for (int d = 0; d < 3; ++d) {
        (*dtheta)(N + 3 * i + d) = ds * wi * (-2.0 * S(d) * diff(d));
        (*dtheta)(4 * N + d) += ds * wi * S(d) * diff(d) * diff(d);
      }
    }
  }
  if (dP) {
    dP->setZero();
    for (Eigen::Index i = 0; i < N; ++i) {
      const Vec3 diff = centers_.row(i).transpose() - P;
      *dP += ds * weights_(i) / u_M_ * phi(i) * 2.0 * S.cwiseProduct(diff);
    }
  }
  return value;
}

namespace {

// exp(-sum_d (P_md - a_id)^2 / Sigma_d), M x N
MatrixXd basis_matrix(const MatrixXd& P, const MatrixXd& A, const Vec3& sigma) {
  MatrixXd E = MatrixXd::Zero(P.rows(), A.rows());
  for (int d = 0; d < 3; ++d) {
    E.array() += (1.0 / sigma(d)) * (P.col(d).replicate(1, A.rows()).rowwise() - A.col(d).transpose())
                            .array()
                            .square();
  }
  return (-E.array()).exp().matrix();
}

}  // namespace

VectorXd RbfPolicy::eval_batch(const MatrixXd& P) const {
  const MatrixXd Phi = basis_matrix(P, centers_, shape_);
  const VectorXd s = Phi * weights_ / u_M_;
  return (0.5 * u_M_ * (s.array().tanh() + 1.0)).matrix();
}

VectorXd RbfPolicy::vjp_batch(const MatrixXd& P, const VectorXd& c) const {
  const Eigen::Index N = num_bases();
  const MatrixXd Phi = basis_matrix(P, centers_, shape_);
  const VectorXd s = Phi * weights_ / u_M_;
  const VectorXd g =
      (c.array() * 0.5 * u_M_ * (1.0 - s.array().tanh().square())).matrix();  // c * dpi/ds

  VectorXd out = VectorXd::Zero(num_params());
  const Vec3 S = shape_.cwiseInverse();
  const VectorXd phi_g = Phi.transpose() * g;  // sum_m g_m phi_mi
  out.head(N) = phi_g / u_M_;
  const VectorXd wu = weights_ / u_M_;
  for (int d = 0; d < 3; ++d) {
    const VectorXd phi_gp = Phi.transpose() * g.cwiseProduct(P.col(d));
    for (Eigen::Index i = 0; i < N; ++i) {
      out(N + 3 * i + d) = -2.0 * S(d) * wu(i) * (centers_(i, d) * phi_g(i) - phi_gp(i));
    }
    const MatrixXd D2 =
        (P.col(d).replicate(1, N).rowwise() - centers_.col(d).transpose()).array().square();
    const double acc = (g.transpose() * (Phi.array() * D2.array()).matrix() * wu)(0);
    out(4 * N + d) = S(d) * acc;
  }
  return out;
}

VectorXd RbfPolicy::params() const {
  const Eigen::Index N = num_bases();
  VectorXd t(num_params());
  t.head(N) = weights_;
  for (Eigen::Index i = 0; i < N; ++i) t.segment(N + 3 * i, 3) = centers_.row(i).transpose();
  t.tail(3) = shape_.array().log().matrix();
  return t;
}

void RbfPolicy::set_params(const VectorXd& t) {
  if (t.size() != num_params()) throw std::invalid_argument("RbfPolicy: wrong parameter count");
  const Eigen::Index N = num_bases();
  weights_ = t.head(N);
  for (Eigen::Index i = 0; i < N; ++i) centers_.row(i) = t.segment(N + 3 * i, 3).transpose();
  shape_ = t.tail(3).array().exp().matrix();
}

void RbfPolicy::save(std::ostream& out) const {
  out << std::setprecision(17);
  out << "mcpilot-policy 1\n";
  out << "u_M " << u_M_ << "\n";
  out << "shape " << shape_(0) << " " << shape_(1) << " " << shape_(2) << "\n";
  out << "bases " << num_bases() << "\n";
  for (Eigen::Index i = 0; i < num_bases(); ++i) {
    out << weights_(i) << " " << centers_(i, 0) << " " << centers_(i, 1) << " " << centers_(i, 2)
        << "\n";
  }
}

RbfPolicy RbfPolicy::load(std::istream& in) {
  auto expect = [&](const std::string& word) {
    std::string got;
    if (!(in >> got) || got != word) {
      throw std::runtime_error("policy file: expected '" + word + "', got '" + got + "'");
    }
  };
  expect("mcpilot-policy");
  int version = 0;
  in >> version;
  if (version != 1) throw std::runtime_error("policy file: unsupported version");
  double u_M = 0.0;
  Vec3 shape;
  Eigen::Index n = 0;
  expect("u_M");
  in >> u_M;
  expect("shape");
  in >> shape(0) >> shape(1) >> shape(2);
  expect("bases");
  in >> n;
  if (!in || n < 0) throw std::runtime_error("policy file: bad header");
  VectorXd w(n);
  MatrixXd A(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) in >> w(i) >> A(i, 0) >> A(i, 1) >> A(i, 2);
  if (!in) throw std::runtime_error("policy file: truncated");
  return RbfPolicy(std::move(w), std::move(A), shape, u_M);
}

RbfPolicy init_policy(const TargetDomain& domain, double u_M, int N_b, RngStream& rng) {
  domain.validate();
  if (N_b < 1) throw std::invalid_argument("init_policy: N_b must be >= 1");
  VectorXd w(N_b);
  MatrixXd A(N_b, 3);
  const double y_max = domain.l_max * std::sin(domain.gamma_max);
  for (int i = 0; i < N_b; ++i) {
    w(i) = rng.uniform(-u_M, u_M);
    A(i, 0) = rng.uniform(0.0, domain.l_max);
    A(i, 1) = rng.uniform(-y_max, y_max);
    A(i, 2) = domain.z;
  }
  return RbfPolicy(std::move(w), std::move(A), Vec3::Constant(0.5), u_M);
}

DropoutMask DropoutMask::identity(Eigen::Index n) { return {VectorXd::Ones(n)}; }

DropoutMask DropoutMask::sample(Eigen::Index n, double p, RngStream& rng) {
  if (!(p >= 0.0) || p > 0.9) throw std::invalid_argument("dropout rate must lie in [0, 0.9]");
  DropoutMask m{VectorXd(n)};
  const double keep = 1.0 / (1.0 - p);
  for (Eigen::Index i = 0; i < n; ++i) m.scale(i) = rng.bernoulli(p) ? 0.0 : keep;
  return m;
}

RbfPolicy DropoutMask::apply(const RbfPolicy& policy) const {
  if (scale.size() != policy.num_bases()) throw std::invalid_argument("dropout mask size");
  return RbfPolicy(policy.weights().cwiseProduct(scale), policy.centers(), policy.shape(),
                   policy.u_M());
}

void DropoutMask::pull_back(VectorXd& grad) const {
  grad.head(scale.size()) = grad.head(scale.size()).cwiseProduct(scale);
}

RbfPolicy apply_dropout(const RbfPolicy& policy, double p, RngStream& rng) {
  return DropoutMask::sample(policy.num_bases(), p, rng).apply(policy);
}

}  // namespace mcpilot
