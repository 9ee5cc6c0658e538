#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "qmservo/controller.hpp"
#include "qmservo/kinematics.hpp"
#include "qmservo/types.hpp"

namespace qm {

// Deterministic target motion profiles. The script drives the center of the
// marker square in the inertial frame; the grasp point sits a fixed height
// above it.
struct TargetScript {
  enum class Kind { Static, ConstantLine, AcceleratingLine, SCurve };

  Kind kind = Kind::Static;
  Vec3 p0 = Vec3::Zero();        // initial marker-square center
  Vec3 direction = Vec3::UnitX();  // line direction (normalized on use)
  double speed = 0.0;            // ConstantLine: constant speed, m/s
  double accel = 0.0;            // AcceleratingLine: ramp rate, m/s^2
  double v_cap = 0.3;            // AcceleratingLine: terminal speed
  double scurve_vx = 0.1;        // SCurve: forward speed
  double scurve_ay = 0.02;       // SCurve: peak lateral acceleration
  double scurve_vy_cap = 0.1;    // SCurve: peak lateral speed

  Vec3 position(double t) const;
  Vec3 velocity(double t) const;
};

struct PlantConfig {
  Tier tier = Tier::Kinematic;
  double dt = 1e-3;            // physics substep
  double base_lag = 0.05;      // kinematic tier: first-order velocity lag, s
  double gravity = 9.81;
  bool arm_coupled = true;     // dynamic tier: use floating-base arm dynamics
  double noise_amplitude = 0.0;  // uniform image noise on normalized coords
  std::uint32_t seed = 0;
  double grasp_height = 0.15;    // grasp point above the marker plane
  double marker_half_size = 0.05;
  double min_depth = 0.05;       // camera-frame depth below which a point is
                                 // reported invisible
};

// The plant: robot + target + camera. Owns ground truth; the controller only
// ever sees the Measurement it produces.
class Plant {
 public:
  Plant(const KinematicModel& model, const PlantConfig& cfg, const TargetScript& target,
        const RobotState& initial);

  // Advance the plant by horizon (one control period) under the actuation,
  // using internal substeps of cfg.dt. Throws std::runtime_error if the state
  // goes non-finite.
  void step(const Actuation& act, double horizon);

  Measurement measure();

  double time() const { return t_; }
  const RobotState& state() const { return state_; }
  bool trackingLost() const { return tracking_lost_; }

  // --- ground-truth accessors (verification and metrics only) ---
  Vec3 graspPointWorld() const;
  Vec3 endEffectorWorld() const;
  std::vector<Vec3> targetPointsCamera() const;   // marker corners, camera frame
  Mat3 targetGainTruth() const;                   // L_o in the virtual camera frame
  Vec3 targetVelocityCamera() const;              // marker velocity, camera coords
  Vec3 cameraLinearVelocityCamera() const;
  Vec3 cameraAngularVelocityCamera() const;
  double armKineticEnergy() const;

 private:
  void substepKinematic(const Actuation& act);
  void substepDynamic(const Actuation& act);
  void checkFinite() const;
  Pose cameraPoseWorld() const;
  std::array<Vec3, 4> markerCornersWorld() const;

  KinematicModel model_;
  PlantConfig cfg_;
  TargetScript target_;
  RobotState state_;
  double t_ = 0.0;
  bool tracking_lost_ = false;
  std::mt19937 rng_;
  std::array<bool, kNumLegs> pinned_{};
  std::array<Vec3, kNumLegs> pin_world_{};
};

}  // namespace qm
