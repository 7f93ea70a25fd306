#include "mcpilot/delayest.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "mcpilot/gp.hpp"

namespace mcpilot {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void BOConfig::validate() const {
  if (!(a_lo <= a_hi) || !(b_lo <= b_hi) || b_lo < 0.0) {
    throw std::invalid_argument("BO: invalid search bounds");
  }
  if (n_init < 2 || n_iter < 0 || starts < 1 || M_d < 1 || !(sigma >= 0.0) ||
      !(horizon > 0.0)) {
    throw std::invalid_argument("BO: need n_init >= 2, n_iter >= 0, M_d >= 1, sigma >= 0");
  }
}

namespace {

// Landings of M_d particles per record, rows grouped by record. Each landing
// is the linear crossing of the target plane between the last two model
// steps, matching how the recorded landings were measured.
MatrixXd predict_landings(double a, double b, const std::vector<ThrowRecord>& records,
                             const DynamicsModel& model, const ArmModel& arm,
                             const TimingConfig& timing, int M_d, double horizon,
                             RngStream& rng) {
  if (records.empty()) throw std::invalid_argument("delay objective: no recorded throws");
  const int M = static_cast<int>(records.size()) * M_d;
  const int steps = static_cast<int>(std::lround(horizon / model.T_s()));
  NoiseBatch nb;
  nb.targets.resize(M, 3);
  nb.delay_u.resize(M);
  VectorXd speed(M), t_rel(M);
  for (int i = 0, m = 0; i < static_cast<int>(records.size()); ++i) {
    for (int k = 0; k < M_d; ++k, ++m) {
      nb.targets.row(m) = records[i].target.vec().transpose();
      speed(m) = records[i].speed;
      nb.delay_u(m) = rng.uniform(0.0, 1.0);
      t_rel(m) = records[i].t_command + a + b * nb.delay_u(m);
    }
  }
  nb.eps.assign(steps, MatrixXd(M, 3));
  for (auto& e : nb.eps) {
    for (int m = 0; m < M; ++m) {
      for (int k = 0; k < 3; ++k) e(m, k) = rng.normal();
    }
  }
  ParticleSet ps = make_particles(nb.targets, speed, t_rel, arm, timing);
  const MatrixXd P0 = ps.P;
  std::vector<MatrixXd> history;
  rollout(ps, model, nb, false, &history);
  MatrixXd land = ps.P;
  for (int m = 0; m < M; ++m) {
    const int f = ps.freeze_step[m];
    if (f < 1) continue;
    const Eigen::RowVector3d prev = f >= 2 ? Eigen::RowVector3d(history[f - 2].row(m)) : Eigen::RowVector3d(P0.row(m));
    const Eigen::RowVector3d cur = history[f - 1].row(m);
    const double z = nb.targets(m, 2);
    const double s = prev(2) > cur(2) ? (prev(2) - z) / (prev(2) - cur(2)) : 1.0;
    land.row(m) = prev + s * (cur - prev);
  }
  return land;
}

}  // namespace

double delay_objective(double a, double b, const std::vector<ThrowRecord>& records,
                       const DynamicsModel& model, const ArmModel& arm,
                       const TimingConfig& timing, int M_d, double horizon, RngStream rng) {
  const MatrixXd P = predict_landings(a, b, records, model, arm, timing, M_d, horizon, rng);
  double total = 0.0;
  for (Eigen::Index m = 0; m < P.rows(); ++m) {
    const Vec3& land = records[m / M_d].landing;
    total += std::hypot(P(m, 0) - land.x(), P(m, 1) - land.y());
  }
  return total / static_cast<double>(P.rows());
}

double landing_rmse(double a, double b, const std::vector<ThrowRecord>& records,
                    const DynamicsModel& model, const ArmModel& arm, const TimingConfig& timing,
                    int M_d, double horizon, RngStream rng) {
  const MatrixXd P = predict_landings(a, b, records, model, arm, timing, M_d, horizon, rng);
  double sq = 0.0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const Eigen::Vector2d mean =
        P.block(static_cast<Eigen::Index>(i) * M_d, 0, M_d, 2).colwise().mean().transpose();
    sq += (mean - records[i].landing.head<2>()).squaredNorm();
  }
  return std::sqrt(sq / static_cast<double>(records.size()));
}

namespace {

struct Surrogate {
  GaussianProcess gp;
  double y_mean = 0.0, y_scale = 1.0;
};

Surrogate fit_surrogate(const MatrixXd& X, const VectorXd& F) {
  Surrogate s;
  s.y_mean = F.mean();
  const double sd =
      std::sqrt((F.array() - s.y_mean).square().sum() / std::max<double>(F.size() - 1, 1));
  s.y_scale = sd > 1e-12 ? sd : 1.0;
  const VectorXd y = ((F.array() - s.y_mean) / s.y_scale).matrix();
  GPHyper init;
  init.lambda = 1.0;
  init.lengthscales = VectorXd::Constant(X.cols(), 0.1);
  init.noise = 1e-4;
  FitOptions opts;
  opts.iters = 100;
  const GPHyper h = fit_hyperparameters(X, y, init, opts);
  s.gp = GaussianProcess(X, y, h);
  return s;
}

// mean - sigma * std on one row, with its gradient in the unit square.
double acquisition(const Surrogate& s, const Eigen::Vector2d& x, double sigma,
                   Eigen::Vector2d* grad) {
  const MatrixXd Xq = x.transpose();
  double value = 0.0;
  for (int d = 0; d < 2; ++d) {
    MatrixXd dX = MatrixXd::Zero(1, 2);
    dX(0, d) = 1.0;
    const auto b = s.gp.predict_batch(Xq, dX);
    const double sd = std::sqrt(b.var(0));
    value = b.mean(0) - sigma * sd;
    const double dsd = sd > 0.0 ? b.dvar(0) / (2.0 * sd) : 0.0;
    (*grad)(d) = b.dmean(0) - sigma * dsd;
  }
  return value;
}

Eigen::Vector2d minimize_acquisition(const Surrogate& s, double sigma, int starts,
                                     const Eigen::Vector2d& active, RngStream& rng) {
  Eigen::Vector2d best_x = Eigen::Vector2d::Zero();
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < starts; ++k) {
    Eigen::Vector2d x(rng.uniform(0.0, 1.0) * active(0), rng.uniform(0.0, 1.0) * active(1));
    Eigen::Vector2d g;
    double f = acquisition(s, x, sigma, &g);
    double step = 0.1;
    for (int it = 0; it < 60 && step > 1e-7; ++it) {
      const Eigen::Vector2d gn = g.cwiseProduct(active);
      if (gn.norm() == 0.0) break;
      const Eigen::Vector2d cand =
          (x - step * gn / gn.norm()).cwiseMax(0.0).cwiseMin(1.0).cwiseProduct(active);
      Eigen::Vector2d cg;
      const double cf = acquisition(s, cand, sigma, &cg);
      if (cf < f) {
        x = cand;
        f = cf;
        g = cg;
        step *= 1.5;
      } else {
        step *= 0.5;
      }
    }
    if (f < best) {
      best = f;
      best_x = x;
    }
  }
  return best_x;
}

}  // namespace

BOResult bo_minimize(const std::function<double(double, double)>& objective, const BOConfig& cfg,
                     RngStream& rng) {
  cfg.validate();
  const double wa = cfg.a_hi - cfg.a_lo, wb = cfg.b_hi - cfg.b_lo;
  // Axes of zero width stay pinned at their lower bound.
  const Eigen::Vector2d active(wa > 0.0 ? 1.0 : 0.0, wb > 0.0 ? 1.0 : 0.0);
  const int total = cfg.n_init + cfg.n_iter;
  MatrixXd X(total, 2);
  VectorXd F(total);
  BOResult out;
  out.F = std::numeric_limits<double>::infinity();
  bool fallback = false;

  for (int it = 0; it < total; ++it) {
    Eigen::Vector2d x;
    if (it < cfg.n_init || fallback) {
      x = Eigen::Vector2d(rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)).cwiseProduct(active);
    } else {
      try {
        const Surrogate s = fit_surrogate(X.topRows(it), F.head(it));
        x = minimize_acquisition(s, cfg.sigma, cfg.starts, active, rng);
      } catch (const std::runtime_error& e) {
        out.warnings.push_back(std::string("surrogate failed at iteration ") +
                               std::to_string(it) + ", switching to uniform sampling: " +
                               e.what());
        fallback = true;
        x = Eigen::Vector2d(rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)).cwiseProduct(active);
      }
    }
    const double a = cfg.a_lo + x(0) * wa;
    const double b = cfg.b_lo + x(1) * wb;
    const double f = objective(a, b);
    if (!std::isfinite(f)) throw std::runtime_error("bo_minimize: objective returned non-finite");
    X.row(it) = x.transpose();
    F(it) = f;
    out.trace.push_back({it, a, b, f});
    if (f < out.F) {
      out.a = a;
      out.b = b;
      out.F = f;
    }
  }
  return out;
}

double recompute_command_time(double t_r, double a_hat) {
  if (a_hat > t_r) throw std::invalid_argument("recompute_command_time: a_hat exceeds t_r");
  return t_r - a_hat;
}

}  // namespace mcpilot
