#include "mcpilot/core.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mcpilot {

void TargetDomain::validate() const {
  if (!(l_min > 0.0) || !(l_min <= l_max)) {
    throw std::invalid_argument("target domain: need 0 < l_min <= l_max");
  }
  if (!(gamma_max >= 0.0) || gamma_max > std::numbers::pi) {
    throw std::invalid_argument("target domain: need 0 <= gamma_max <= pi");
  }
  if (!std::isfinite(z)) throw std::invalid_argument("target domain: z not finite");
}

bool TargetDomain::contains(const TargetPoint& p, double tol) const {
  const double l = std::hypot(p.x, p.y);
  if (l < l_min - tol || l > l_max + tol) return false;
  if (std::abs(p.z - z) > tol) return false;
  return std::abs(std::atan2(p.y, p.x)) <= gamma_max + tol;
}

Vec3 ReleaseGeometry::release_point(double gamma) const {
  return {l_r * std::cos(gamma), l_r * std::sin(gamma), z_rel};
}

void PhysicalConstants::validate() const {
  if (!(g > 0.0 && rho > 0.0 && nu > 0.0)) {
    throw std::invalid_argument("physical constants must be strictly positive");
  }
}

namespace {

// splitmix64 finaliser, used only to spread stream ids.
std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), engine_(make_engine(seed, stream)) {}

RngStream RngStream::derive(std::uint64_t key) const {
  return RngStream(seed_, mix(stream_ ^ mix(key)));
}

double RngStream::uniform(double lo, double hi) {
  if (lo == hi) {
    engine_();  // keep the draw count independent of the interval width
    return lo;
  }
  return std::uniform_real_distribution<double>(lo, hi)(engine_);
}

double RngStream::normal() { return normal_(engine_); }

bool RngStream::bernoulli(double p) { return uniform(0.0, 1.0) < p; }

TargetPoint sample_target(const TargetDomain& domain, RngStream& rng) {
  const double l = rng.uniform(domain.l_min, domain.l_max);
  const double g = rng.uniform(-domain.gamma_max, domain.gamma_max);
  return {l * std::cos(g), l * std::sin(g), domain.z};
}

std::pair<double, double> polar_of_target(const TargetPoint& p) {
  if (p.x == 0.0 && p.y == 0.0) {
    throw std::invalid_argument("polar_of_target: bearing undefined at the origin");
  }
  return {std::hypot(p.x, p.y), std::atan2(p.y, p.x)};
}

double saturated_cost(const Vec3& position, const TargetPoint& target, double l_c) {
  const double dx = position.x() - target.x;
  const double dy = position.y() - target.y;
  return 1.0 - std::exp(-(dx * dx + dy * dy) / l_c);
}

double saturated_cost(const ExtendedState& x, const CostParams& params) {
  return saturated_cost(x.state.p, x.target, params.l_c);
}

Vec3 velocity_direction(double gamma, double alpha) {
  const double ca = std::cos(alpha);
  return {ca * std::cos(gamma), ca * std::sin(gamma), std::sin(alpha)};
}

}  // namespace mcpilot
