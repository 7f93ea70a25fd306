#include "mcpilot/dynamics.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

namespace mcpilot {

using Eigen::MatrixXd;
using Eigen::VectorXd;

Eigen::Index gp_input_dim(GPInput input) { return input == GPInput::Velocity ? 3 : 6; }

const char* to_string(GPInput input) {
  return input == GPInput::Velocity ? "velocity" : "full";
}

GPInput gp_input_from_string(const std::string& s) {
  if (s == "velocity") return GPInput::Velocity;
  if (s == "full") return GPInput::FullState;
  throw std::invalid_argument("GP input map must be 'velocity' or 'full', got '" + s + "'");
}

void GPDataset::validate() const {
  if (X.rows() != Y.rows()) throw std::invalid_argument("GPDataset: row counts disagree");
  if (Y.cols() != 3) throw std::invalid_argument("GPDataset: need three output columns");
}

std::vector<Trajectory> augment_trajectory(const Trajectory& traj, int N_a, RngStream& rng) {
  if (N_a < 0) throw std::invalid_argument("augment_trajectory: N_a must be >= 0");
  std::vector<Trajectory> out{traj};
  for (int k = 0; k < N_a; ++k) {
    const double angle = rng.uniform(-std::numbers::pi, std::numbers::pi);
    const Eigen::Matrix3d R = Eigen::AngleAxisd(angle, Vec3::UnitZ()).toRotationMatrix();
    Trajectory rotated = traj;
    for (auto& s : rotated) {
      s.p = R * s.p;
      s.v = R * s.v;
    }
    out.push_back(std::move(rotated));
  }
  return out;
}

GPDataset build_dataset(const std::vector<Trajectory>& trajectories, GPInput input, double T_s) {
  Eigen::Index rows = 0;
  for (const auto& tr : trajectories) {
    for (std::size_t k = 1; k < tr.size(); ++k) {
      if (std::abs(tr[k].t - tr[k - 1].t - T_s) > 1e-6) {
        throw std::invalid_argument("build_dataset: trajectory not sampled every T_s");
      }
    }
    if (tr.size() > 1) rows += static_cast<Eigen::Index>(tr.size()) - 1;
  }
  GPDataset d;
  d.X.resize(rows, gp_input_dim(input));
  d.Y.resize(rows, 3);
  Eigen::Index r = 0;
  for (const auto& tr : trajectories) {
    for (std::size_t k = 0; k + 1 < tr.size(); ++k, ++r) {
      if (input == GPInput::Velocity) {
        d.X.row(r) = tr[k].v.transpose();
      } else {
        d.X.row(r) << tr[k].p.transpose(), tr[k].v.transpose();
      }
      d.Y.row(r) = (tr[k + 1].v - tr[k].v).transpose();
    }
  }
  return d;
}

GPDataset subsample(const GPDataset& data, Eigen::Index max_points) {
  const Eigen::Index n = data.size();
  if (max_points <= 0 || n <= max_points) return data;
  GPDataset out;
  out.X.resize(max_points, data.X.cols());
  out.Y.resize(max_points, data.Y.cols());
  for (Eigen::Index k = 0; k < max_points; ++k) {
    const Eigen::Index i = (k * n) / max_points;
    out.X.row(k) = data.X.row(i);
    out.Y.row(k) = data.Y.row(i);
  }
  return out;
}

DynamicsModel::DynamicsModel(std::array<GaussianProcess, 3> gps, double T_s, GPInput input)
    : gps_(std::move(gps)), T_s_(T_s), input_(input) {
  if (!(T_s_ > 0.0)) throw std::invalid_argument("DynamicsModel: T_s must be positive");
  for (const auto& gp : gps_) {
    if (gp.dim() != gp_input_dim(input_)) {
      throw std::invalid_argument("DynamicsModel: GP input width does not match the input map");
    }
  }
}

DynamicsModel DynamicsModel::fit(const GPDataset& data, double T_s, GPInput input,
                                 const FitOptions& opts) {
  data.validate();
  if (data.X.cols() != gp_input_dim(input)) {
    throw std::invalid_argument("DynamicsModel::fit: dataset width does not match the input map");
  }
  std::array<GaussianProcess, 3> gps;
  for (int k = 0; k < 3; ++k) {
    const VectorXd y = data.Y.col(k);
    const GPHyper h = fit_hyperparameters(data.X, y, default_hyper(data.X, y), opts);
    gps[k] = GaussianProcess(data.X, y, h);
  }
  return DynamicsModel(std::move(gps), T_s, input);
}

MatrixXd DynamicsModel::features(const MatrixXd& P, const MatrixXd& V) const {
  if (input_ == GPInput::Velocity) return V;
  MatrixXd F(P.rows(), 6);
  F << P, V;
  return F;
}

DynamicsModel::OneStep DynamicsModel::one_step(const CartesianState& x, double dt) const {
  if (dt < 0.0) dt = T_s_;
  const Batch b = predict(x.p.transpose(), x.v.transpose());
  const double r = dt / T_s_;
  OneStep out;
  out.delta_mean = r * b.mean.row(0).transpose();
  out.delta_var = r * r * b.var.row(0).transpose();
  out.mean.head<3>() = x.p + dt * x.v + 0.5 * dt * out.delta_mean;
  out.mean.tail<3>() = x.v + out.delta_mean;
  const Eigen::Matrix3d S = out.delta_var.asDiagonal();
  out.cov.topLeftCorner<3, 3>() = 0.25 * dt * dt * S;
  out.cov.topRightCorner<3, 3>() = 0.5 * dt * S;
  out.cov.bottomLeftCorner<3, 3>() = 0.5 * dt * S;
  out.cov.bottomRightCorner<3, 3>() = S;
  return out;
}

DynamicsModel::Batch DynamicsModel::predict(const MatrixXd& P, const MatrixXd& V) const {
  return predict(P, V, MatrixXd(), MatrixXd());
}

DynamicsModel::Batch DynamicsModel::predict(const MatrixXd& P, const MatrixXd& V,
                                            const MatrixXd& dP, const MatrixXd& dV) const {
  const Eigen::Index M = V.rows();
  const bool tangent = dV.size() > 0;
  const MatrixXd F = features(P, V);
  const MatrixXd dF = tangent ? features(dP, dV) : MatrixXd();
  Batch out;
  out.mean.resize(M, 3);
  out.var.resize(M, 3);
  if (tangent) {
    out.dmean.resize(M, 3);
    out.dvar.resize(M, 3);
  }
  for (int k = 0; k < 3; ++k) {
    const auto b = gps_[k].predict_batch(F, dF);
    out.mean.col(k) = b.mean;
    out.var.col(k) = b.var;
    if (tangent) {
      out.dmean.col(k) = b.dmean;
      out.dvar.col(k) = b.dvar;
    }
  }
  return out;
}

void DynamicsModel::save(std::ostream& out) const {
  out << std::setprecision(17);
  out << "mcpilot-dynamics 1\n";
  out << "T_s " << T_s_ << "\n";
  out << "input " << to_string(input_) << "\n";
  const auto& X = gps_[0].X();
  out << "points " << X.rows() << " " << X.cols() << "\n";
  for (int k = 0; k < 3; ++k) {
    const GPHyper& h = gps_[k].hyper();
    out << "gp " << k << " " << h.lambda << " " << h.noise;
    for (Eigen::Index d = 0; d < h.lengthscales.size(); ++d) out << " " << h.lengthscales(d);
    out << "\n";
  }
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index d = 0; d < X.cols(); ++d) out << X(i, d) << " ";
    out << gps_[0].y()(i) << " " << gps_[1].y()(i) << " " << gps_[2].y()(i) << "\n";
  }
}

DynamicsModel DynamicsModel::load(std::istream& in) {
  auto expect = [&](const std::string& word) {
    std::string got;
    if (!(in >> got) || got != word) {
      throw std::runtime_error("dynamics model: expected '" + word + "', got '" + got + "'");
    }
  };
  expect("mcpilot-dynamics");
  int version = 0;
  in >> version;
  if (version != 1) throw std::runtime_error("dynamics model: unsupported version");
  double T_s = 0.0;
  std::string input_name;
  Eigen::Index n = 0, dim = 0;
  expect("T_s");
  in >> T_s;
  expect("input");
  in >> input_name;
  expect("points");
  in >> n >> dim;
  if (!in || n < 1 || dim < 1) throw std::runtime_error("dynamics model: bad header");
  std::array<GPHyper, 3> hyper;
  for (int k = 0; k < 3; ++k) {
    int idx = -1;
    expect("gp");
    in >> idx >> hyper[k].lambda >> hyper[k].noise;
    if (idx != k) throw std::runtime_error("dynamics model: GP blocks out of order");
    hyper[k].lengthscales.resize(dim);
    for (Eigen::Index d = 0; d < dim; ++d) in >> hyper[k].lengthscales(d);
  }
  MatrixXd X(n, dim), Y(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index d = 0; d < dim; ++d) in >> X(i, d);
    in >> Y(i, 0) >> Y(i, 1) >> Y(i, 2);
  }
  if (!in) throw std::runtime_error("dynamics model: truncated training set");
  std::array<GaussianProcess, 3> gps;
  for (int k = 0; k < 3; ++k) gps[k] = GaussianProcess(X, Y.col(k), hyper[k]);
  return DynamicsModel(std::move(gps), T_s, gp_input_from_string(input_name));
}

}  // namespace mcpilot
