#pragma once

#include <cstdint>
#include <random>
#include <utility>

#include <Eigen/Core>

namespace mcpilot {

using Vec3 = Eigen::Vector3d;

/// Object centre-of-mass position [m] and velocity [m/s].
struct CartesianState {
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();

  bool finite() const { return p.allFinite() && v.allFinite(); }
};

/// Centre of the target opening, world frame [m].
struct TargetPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3 vec() const { return {x, y, z}; }
  static TargetPoint from(const Vec3& v) { return {v.x(), v.y(), v.z()}; }
};

/// Object state augmented with the target it is thrown at.
struct ExtendedState {
  CartesianState state;
  TargetPoint target;
};

/// Annular sector of admissible targets on the plane z = z.
///
/// Targets are P = (l cos g, l sin g, z) with l in [l_min, l_max] and
/// |g| <= gamma_max.
struct TargetDomain {
  double l_min = 0.75;
  double l_max = 2.4;
  double gamma_max = 0.5235987755982988;  // pi / 6
  double z = -1.0;

  void validate() const;
  bool contains(const TargetPoint& p, double tol = 1e-9) const;
};

/// Fixed release geometry: the object leaves the hand at radius l_r along
/// the target bearing, height z_rel, with vertical angle alpha.
struct ReleaseGeometry {
  double l_r = 0.07;
  double z_rel = 1.50;
  double alpha = 0.0;

  Vec3 release_point(double gamma) const;
};

struct CostParams {
  double l_c = 0.1;
};

struct PhysicalConstants {
  double g = 9.81;
  double rho = 1.204;     // air density at 20 C [kg/m^3]
  double nu = 1.516e-5;   // kinematic viscosity of air at 20 C [m^2/s]

  void validate() const;
};

/// Named purposes for streams derived from one master seed.
enum class StreamPurpose : std::uint64_t {
  Exploration = 1,
  Particles = 2,
  Dropout = 3,
  BayesOpt = 4,
  World = 5,
  PolicyInit = 6,
  Evaluation = 7,
  Network = 8,
  Augmentation = 9,
  DelayObjective = 10,
};

/// Deterministic random stream identified by (seed, stream id).
///
/// Copying a stream copies its full state, so a copy replays the same
/// sequence as the original.
class RngStream {
 public:
  RngStream(std::uint64_t seed = 0, std::uint64_t stream = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  /// Independent child stream; same (seed, stream, key) -> same child.
  RngStream derive(std::uint64_t key) const;
  RngStream derive(StreamPurpose purpose) const {
    return derive(static_cast<std::uint64_t>(purpose));
  }

  double uniform(double lo, double hi);
  double normal();
  bool bernoulli(double p);
  std::uint64_t next_u64() { return engine_(); }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Uniform in (l, gamma) over the domain parameters.
TargetPoint sample_target(const TargetDomain& domain, RngStream& rng);

/// (l, gamma) of the horizontal projection. Throws std::invalid_argument
/// at the origin, where the bearing is undefined.
std::pair<double, double> polar_of_target(const TargetPoint& p);

/// 1 - exp(-(dx^2 + dy^2) / l_c); the vertical offset never contributes.
double saturated_cost(const ExtendedState& x, const CostParams& params);
double saturated_cost(const Vec3& position, const TargetPoint& target, double l_c);

/// (cos a cos g, cos a sin g, sin a).
Vec3 velocity_direction(double gamma, double alpha);

}  // namespace mcpilot
