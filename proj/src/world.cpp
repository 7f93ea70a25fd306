#include "mcpilot/world.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mcpilot {

double DragModel::area() const { return std::numbers::pi * radius * radius; }

void DragModel::validate() const {
  if (!(radius > 0.0) || !(mass > 0.0)) {
    throw std::invalid_argument("drag model: radius and mass must be positive");
  }
  if (!(constant_cd > 0.0)) throw std::invalid_argument("drag model: C_D must be positive");
}

double drag_coefficient(double re, const DragModel& drag) {
  if (drag.correlation == DragCorrelation::Constant) return drag.constant_cd;
  re = std::max(re, 1e-3);
  const auto p10 = [](double x) { return std::pow(x, 10.0); };
  const double phi1 = p10(24.0 / re) + p10(21.0 / std::pow(re, 0.67)) +
                      p10(4.0 / std::pow(re, 0.33)) + p10(0.4);
  const double phi2 = 1.0 / (1.0 / p10(0.148 * std::pow(re, 0.11)) + 1.0 / p10(0.5));
  const double phi3 = p10(1.57e8 / std::pow(re, 1.625));
  const double phi4 = 1.0 / (1.0 / p10(6e-17 * std::pow(re, 2.63)) + 1.0 / p10(0.2));
  return std::pow(1.0 / (1.0 / (phi1 + phi2) + 1.0 / phi3) + phi4, 0.1);
}

Vec3 drag_acceleration(const CartesianState& s, const DragModel& drag,
                       const PhysicalConstants& constants) {
  const double speed = s.v.norm();
  if (!drag.enabled || speed == 0.0) return Vec3::Zero();
  const double re = speed * 2.0 * drag.radius / constants.nu;
  const double k = 0.5 * constants.rho * drag_coefficient(re, drag) * drag.area() / drag.mass;
  return -k * speed * s.v;
}

void WorldConfig::validate() const {
  constants.validate();
  drag.validate();
  if (!(delay_lo >= 0.0) || !(delay_lo <= delay_hi)) {
    throw std::invalid_argument("world: need 0 <= delay_lo <= delay_hi");
  }
  if (!(dt > 0.0) || !(T_s > 0.0) || dt > T_s) {
    throw std::invalid_argument("world: need 0 < dt <= T_s");
  }
  const double ratio = T_s / dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9) {
    throw std::invalid_argument("world: T_s must be an integer multiple of dt");
  }
  if (!(hit_radius > 0.0) || !(max_flight_time > 0.0)) {
    throw std::invalid_argument("world: hit radius and flight-time cap must be positive");
  }
}

WorldConfig WorldConfig::from_config(const Config& cfg) {
  WorldConfig w;
  w.constants.g = cfg.get_double("g", w.constants.g);
  w.constants.rho = cfg.get_double("rho", w.constants.rho);
  w.constants.nu = cfg.get_double("nu", w.constants.nu);
  w.drag.radius = cfg.get_double("world.radius", w.drag.radius);
  w.drag.mass = cfg.get_double("world.mass", w.drag.mass);
  w.drag.enabled = cfg.get_bool("world.drag", w.drag.enabled);
  w.drag.constant_cd = cfg.get_double("world.cd", w.drag.constant_cd);
  const std::string model = cfg.get_string("world.drag_model", "almedeij");
  if (model == "almedeij") {
    w.drag.correlation = DragCorrelation::Almedeij;
  } else if (model == "constant") {
    w.drag.correlation = DragCorrelation::Constant;
  } else {
    throw std::invalid_argument("config: world.drag_model must be almedeij or constant");
  }
  w.delay_lo = cfg.get_double("world.delay_lo", w.delay_lo);
  w.delay_hi = cfg.get_double("world.delay_hi", w.delay_hi);
  w.dt = cfg.get_double("world.dt", w.dt);
  w.T_s = cfg.get_double("T_s", w.T_s);
  w.hit_radius = cfg.get_double("hit_radius", w.hit_radius);
  w.max_flight_time = cfg.get_double("world.max_flight_time", w.max_flight_time);
  w.validate();
  return w;
}

double ThrowRecord::error() const {
  return std::hypot(landing.x() - target.x, landing.y() - target.y);
}

Vec3 landing_of(const Trajectory& samples, double z_plane) {
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const double z = samples[k].p.z();
    if (z == z_plane) return samples[k].p;
    if (k > 0 && z < z_plane && samples[k - 1].p.z() > z_plane) {
      const double z0 = samples[k - 1].p.z();
      const double s = (z0 - z_plane) / (z0 - z);
      return samples[k - 1].p + s * (samples[k].p - samples[k - 1].p);
    }
  }
  throw std::runtime_error("landing_of: trajectory never crosses z = " + std::to_string(z_plane));
}

World::World(ArmModel arm, WorldConfig cfg) : arm_(std::move(arm)), cfg_(cfg) {
  arm_.validate();
  cfg_.validate();
}

void World::set_delay_law(double lo, double hi) {
  WorldConfig next = cfg_;
  next.delay_lo = lo;
  next.delay_hi = hi;
  next.validate();
  cfg_ = next;
}

namespace {

struct Deriv {
  Vec3 dp, dv;
};

}  // namespace

ThrowRecord World::fly(const CartesianState& release, double t0, double z_plane) const {
  if (!release.finite()) throw std::runtime_error("world: non-finite release state");
  if (release.p.z() < z_plane) {
    throw std::runtime_error("world: release point below the landing plane");
  }
  const Vec3 gravity(0.0, 0.0, -cfg_.constants.g);
  auto f = [&](const Vec3& p, const Vec3& v) -> Deriv {
    return {v, gravity + drag_acceleration({p, v}, cfg_.drag, cfg_.constants)};
  };

  ThrowRecord rec;
  rec.release = release;
  const long long per_sample = std::llround(cfg_.T_s / cfg_.dt);
  const long long max_steps = static_cast<long long>(std::ceil(cfg_.max_flight_time / cfg_.dt));
  Vec3 p = release.p, v = release.v;
  rec.samples.push_back({t0, p, v});
  bool landed = false;
  for (long long step = 1; step <= max_steps; ++step) {
    const double h = cfg_.dt;
    const Deriv k1 = f(p, v);
    const Deriv k2 = f(p + 0.5 * h * k1.dp, v + 0.5 * h * k1.dv);
    const Deriv k3 = f(p + 0.5 * h * k2.dp, v + 0.5 * h * k2.dv);
    const Deriv k4 = f(p + h * k3.dp, v + h * k3.dv);
    const Vec3 p_next = p + h / 6.0 * (k1.dp + 2.0 * k2.dp + 2.0 * k3.dp + k4.dp);
    const Vec3 v_next = v + h / 6.0 * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv);
    if (!landed && p.z() > z_plane && p_next.z() <= z_plane) {
      const double s = (p.z() - z_plane) / (p.z() - p_next.z());
      rec.landing = p + s * (p_next - p);
      landed = true;
    }
    p = p_next;
    v = v_next;
    if (step % per_sample == 0) {
      rec.samples.push_back({t0 + static_cast<double>(step) * cfg_.dt, p, v});
      if (landed) break;
    }
  }
  if (!landed && release.p.z() == z_plane) {
    rec.landing = release.p;
    landed = true;
  }
  if (!landed) throw std::runtime_error("world: object did not land within the flight-time cap");
  return rec;
}

ThrowRecord World::execute(const ThrowPlan& plan, const TargetPoint& target,
                           RngStream& rng) const {
  const double delay = rng.uniform(cfg_.delay_lo, cfg_.delay_hi);
  const double t_release = plan.t_command() + delay;
  if (t_release > plan.duration()) {
    throw std::runtime_error("world: release happens after the trajectory ends");
  }
  const ReleaseState h = release_state_h(plan, t_release, arm_);
  ThrowRecord rec = fly({h.p, h.v}, t_release, target.z);
  rec.speed = plan.speed();
  rec.target = target;
  rec.t_command = plan.t_command();
  rec.delay = delay;
  rec.hit = rec.error() <= cfg_.hit_radius;
  ++throws_;
  return rec;
}

}  // namespace mcpilot
