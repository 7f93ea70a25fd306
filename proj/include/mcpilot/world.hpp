#pragma once

#include <vector>

#include "mcpilot/config.hpp"
#include "mcpilot/core.hpp"
#include "mcpilot/kinematics.hpp"

namespace mcpilot {

enum class DragCorrelation {
  Almedeij,  // smooth sphere correlation, valid from creeping flow past the drag crisis
  Constant,  // fixed C_D
};

struct DragModel {
  double radius = 0.0215;  // golf ball [m]
  double mass = 0.02;      // [kg]
  DragCorrelation correlation = DragCorrelation::Almedeij;
  double constant_cd = 0.47;
  bool enabled = true;

  double area() const;
  void validate() const;
};

/// Sphere drag coefficient at Reynolds number re.
double drag_coefficient(double re, const DragModel& drag);

/// Drag force divided by mass; zero when drag is disabled.
Vec3 drag_acceleration(const CartesianState& s, const DragModel& drag,
                       const PhysicalConstants& constants);

struct WorldConfig {
  PhysicalConstants constants;
  DragModel drag;
  double delay_lo = 0.01;  // true gripper delay ~ U[delay_lo, delay_hi] [s]
  double delay_hi = 0.02;
  double dt = 1e-3;        // integrator step [s]
  double T_s = 0.01;       // recorded sampling period [s]
  double hit_radius = 0.1;
  double max_flight_time = 10.0;

  void validate() const;
  static WorldConfig from_config(const Config& cfg);
};

struct TrajectorySample {
  double t = 0.0;
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
};

using Trajectory = std::vector<TrajectorySample>;

/// One executed throw. Samples start at the actual release instant and end
/// with the first sample at or below the target plane.
struct ThrowRecord {
  double speed = 0.0;
  TargetPoint target;
  double t_command = 0.0;
  double delay = 0.0;
  CartesianState release;
  Trajectory samples;
  Vec3 landing = Vec3::Zero();
  bool hit = false;

  /// Horizontal landing error [m].
  double error() const;
};

/// Linear interpolation of the first downward crossing of z = z_plane.
/// Throws std::runtime_error when the trajectory never reaches the plane.
Vec3 landing_of(const Trajectory& samples, double z_plane);

/// Ground-truth simulator. The true delay law is private to this object;
/// learners only see the ThrowRecords it returns.
class World {
 public:
  World(ArmModel arm, WorldConfig cfg);

  const ArmModel& arm() const { return arm_; }
  double T_s() const { return cfg_.T_s; }
  double hit_radius() const { return cfg_.hit_radius; }
  const PhysicalConstants& constants() const { return cfg_.constants; }

  /// Executes the plan toward `target`; the object lands on the plane
  /// z = target.z. Draws exactly one delay sample from `rng`.
  ThrowRecord execute(const ThrowPlan& plan, const TargetPoint& target, RngStream& rng) const;

  /// Free flight from a given state until the plane z = z_plane.
  ThrowRecord fly(const CartesianState& release, double t0, double z_plane) const;

  /// Number of throws executed so far by this instance.
  long long throw_count() const { return throws_; }

  /// Test hook for the information-barrier check.
  void set_delay_law(double lo, double hi);

 private:
  ArmModel arm_;
  WorldConfig cfg_;
  mutable long long throws_ = 0;
};

}  // namespace mcpilot
