#include "mcpilot/baselines.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mcpilot {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double ballistic_speed(const TargetPoint& P, const ReleaseGeometry& geom,
                       const PhysicalConstants& constants) {
  const double d = std::hypot(P.x, P.y) - geom.l_r;
  if (d < -1e-12) throw std::domain_error("ballistic_speed: target behind the release point");
  if (d <= 0.0) return 0.0;
  const double ca = std::cos(geom.alpha);
  const double den = 2.0 * ca * ca * (d * std::tan(geom.alpha) - P.z + geom.z_rel);
  if (!(den > 0.0)) throw std::domain_error("ballistic_speed: target above every trajectory");
  return std::sqrt(constants.g * d * d / den);
}

double BallisticPolicy::operator()(const TargetPoint& P) const {
  return std::min(ballistic_speed(P, geom, constants), u_M);
}

bool BallisticPolicy::infeasible(const TargetPoint& P) const {
  return ballistic_speed(P, geom, constants) > u_M;
}

void RegressionSet::validate() const {
  if (inputs.size() != speeds.size()) throw std::invalid_argument("regression set: size mismatch");
  if (inputs.empty()) throw std::invalid_argument("regression set: empty");
}

Mlp::Mlp(int hidden_layers, int width, double u_M) : u_M_(u_M) {
  if (hidden_layers < 1 || width < 1) throw std::invalid_argument("Mlp: bad architecture");
  if (!(u_M > 0.0)) throw std::invalid_argument("Mlp: u_M must be positive");
  int in = 3;
  for (int k = 0; k < hidden_layers; ++k) {
    W_.push_back(MatrixXd::Zero(in, width));
    b_.push_back(VectorXd::Zero(width));
    in = width;
  }
  W_.push_back(MatrixXd::Zero(in, 1));
  b_.push_back(VectorXd::Zero(1));
}

VectorXd Mlp::forward(const MatrixXd& X) const {
  MatrixXd H = (X.rowwise() - in_mean.transpose()).array().rowwise() /
               in_scale.transpose().array();
  for (std::size_t k = 0; k + 1 < W_.size(); ++k) {
    H = ((H * W_[k]).rowwise() + b_[k].transpose()).cwiseMax(0.0);
  }
  const VectorXd s = (H * W_.back()).col(0).array() + b_.back()(0);
  return (0.5 * u_M_ * (s.array().tanh() + 1.0)).matrix();
}

double Mlp::operator()(const Vec3& x) const { return forward(x.transpose())(0); }

struct MlpTrainer {
  static MlpTrainResult run(const RegressionSet& data, const MlpTrainConfig& cfg,
                            RngStream& rng) {
    data.validate();
    if (cfg.epochs < 0 || !(cfg.lr > 0.0)) throw std::invalid_argument("train_mlp: bad settings");
    const Eigen::Index n = static_cast<Eigen::Index>(data.size());
    MatrixXd X(n, 3);
    VectorXd t(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      X.row(i) = data.inputs[i].transpose();
      t(i) = data.speeds[i];
    }

    MlpTrainResult res;
    Mlp& net = res.model;
    net = Mlp(cfg.hidden_layers, cfg.width, cfg.u_M);
    net.in_mean = X.colwise().mean().transpose();
    for (int d = 0; d < 3; ++d) {
      const double sd =
          n > 1 ? std::sqrt((X.col(d).array() - net.in_mean(d)).square().sum() / (n - 1)) : 0.0;
      net.in_scale(d) = sd > 1e-9 ? sd : 1.0;
    }
    for (auto& W : net.W_) {
      const double lim = std::sqrt(6.0 / static_cast<double>(W.rows()));
      for (Eigen::Index i = 0; i < W.size(); ++i) W.data()[i] = rng.uniform(-lim, lim);
    }

    const std::size_t L = net.W_.size();
    std::vector<MatrixXd> mW(L), vW(L);
    std::vector<VectorXd> mb(L), vb(L);
    for (std::size_t k = 0; k < L; ++k) {
      mW[k] = vW[k] = MatrixXd::Zero(net.W_[k].rows(), net.W_[k].cols());
      mb[k] = vb[k] = VectorXd::Zero(net.b_[k].size());
    }
    const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    const MatrixXd Xn = (X.rowwise() - net.in_mean.transpose()).array().rowwise() /
                        net.in_scale.transpose().array();

    std::vector<MatrixXd> acts(L);  // input to layer k
    for (int epoch = 0; epoch <= cfg.epochs; ++epoch) {
      acts[0] = Xn;
      for (std::size_t k = 0; k + 1 < L; ++k) {
        acts[k + 1] = ((acts[k] * net.W_[k]).rowwise() + net.b_[k].transpose()).cwiseMax(0.0);
      }
      const VectorXd s = (acts[L - 1] * net.W_[L - 1]).col(0).array() + net.b_[L - 1](0);
      const VectorXd th = s.array().tanh();
      const VectorXd y = (0.5 * cfg.u_M * (th.array() + 1.0)).matrix();
      const VectorXd r = y - t;
      const double loss = r.squaredNorm() / static_cast<double>(n);
      if (!std::isfinite(loss)) {
        throw std::runtime_error("train_mlp: loss became non-finite at epoch " +
                                 std::to_string(epoch));
      }
      res.final_loss = loss;
      if (epoch == cfg.epochs) break;
      res.loss.push_back(loss);

      // Backpropagation of the mean squared error.
      MatrixXd delta = (2.0 / static_cast<double>(n) * r.array() * 0.5 * cfg.u_M *
                        (1.0 - th.array().square()))
                           .matrix();
      const double step = static_cast<double>(epoch + 1);
      const double c1 = 1.0 - std::pow(b1, step), c2 = 1.0 - std::pow(b2, step);
      for (std::size_t kk = L; kk-- > 0;) {
        const MatrixXd gW = acts[kk].transpose() * delta;
        const VectorXd gb = delta.colwise().sum().transpose();
        if (kk > 0) {
          delta = ((delta * net.W_[kk].transpose()).array() * (acts[kk].array() > 0.0).cast<double>())
                      .matrix();
        }
        mW[kk] = b1 * mW[kk] + (1 - b1) * gW;
        vW[kk] = b2 * vW[kk] + (1 - b2) * gW.cwiseAbs2();
        mb[kk] = b1 * mb[kk] + (1 - b1) * gb;
        vb[kk] = b2 * vb[kk] + (1 - b2) * gb.cwiseAbs2();
        net.W_[kk].array() -= cfg.lr * (mW[kk].array() / c1) / ((vW[kk].array() / c2).sqrt() + eps);
        net.b_[kk].array() -= cfg.lr * (mb[kk].array() / c1) / ((vb[kk].array() / c2).sqrt() + eps);
      }
    }
    return res;
  }
};

MlpTrainResult train_mlp(const RegressionSet& data, const MlpTrainConfig& cfg, RngStream& rng) {
  if (cfg.hidden_layers < 1 || cfg.hidden_layers > 3) {
    throw std::invalid_argument("train_mlp: hidden layer count must be 1, 2 or 3");
  }
  return MlpTrainer::run(data, cfg, rng);
}

}  // namespace mcpilot
