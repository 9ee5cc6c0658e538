#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "qmservo/arm_control.hpp"
#include "qmservo/features.hpp"
#include "qmservo/gait.hpp"
#include "qmservo/kinematics.hpp"
#include "qmservo/leg_control.hpp"
#include "qmservo/mpc.hpp"
#include "qmservo/observer.hpp"
#include "qmservo/servo.hpp"
#include "qmservo/types.hpp"

namespace qm {

// Everything the controller is allowed to see: the robot state, the detected
// normalized-plane image points, and the clock. Ground-truth target depth and
// velocity never cross this interface.
struct Measurement {
  double t = 0.0;
  RobotState state;
  std::vector<Vec2> points;
  std::vector<std::uint8_t> visible;
};

enum class Tier { Kinematic, Dynamic };

struct ControllerConfig {
  Tier tier = Tier::Kinematic;
  bool use_sto = true;  // false reproduces the woSTO ablation (no feedforward)
  double dt_control = 0.0025;  // 400 Hz
  int mpc_decimation = 4;      // MPC solved every Nth control step (~100 Hz)
  double workspace_cone_deg = 45.0;  // arm active while h_o is inside this cone
  bool planar_base = true;  // keep the base at constant height; arm closes vertical error
  // Range error recovered from the angular-size ratio of the observed marker
  // and the congruent virtual square, fed to the base along the line of sight.
  // The raw centroid error only encodes range to second order, which is far
  // too weak for the approach phase.
  double kb_depth = 1.2;
  double gravity = 9.81;

  ObserverGains observer;
  ServoGains servo;
  MpcWeights mpc;
  GaitSchedule gait;
  LegGains leg;
  ArmGains arm;
  VirtualPointSet vpoints = VirtualPointSet::standard();
};

// Commands handed to the plant. The kinematic tier consumes the velocity
// commands; the dynamic tier consumes torques plus the swing-foot plan.
struct Actuation {
  Vec3 v_B_cmd = Vec3::Zero();
  Vec6 qd_arm_cmd = Vec6::Zero();

  std::array<Vec3, kNumLegs> leg_tau{};
  std::array<std::uint8_t, kNumLegs> stance{};  // scheduled contact set
  std::array<Vec3, kNumLegs> swing_foot_pos_B{};
  std::array<Vec3, kNumLegs> swing_foot_vel_B{};
  Vec6 arm_tau = Vec6::Zero();
  std::array<Vec3, kNumLegs> grf_world{};
  bool use_direct_grf = false;
};

// Per-step trace for the harness CSVs.
struct ControlTrace {
  double t = 0.0;
  Vec3 h_o = Vec3::Zero();
  Vec3 h_t = Vec3::Zero();
  Vec3 e = Vec3::Zero();
  Vec3 e_o = Vec3::Zero();
  Vec3 v_T_est = Vec3::Zero();
  Vec3 v_B_d = Vec3::Zero();
  Vec6 qd_arm_d = Vec6::Zero();
  bool arm_active = false;
  bool arm_near_singular = false;
  bool mpc_solved = false;
  bool mpc_stale = false;
  int mpc_iterations = 0;
  double mpc_kkt = 0.0;
  double mpc_solve_ms = 0.0;
  std::array<Vec3, kNumLegs> grf{};
  std::array<Vec3, kNumLegs> leg_tau{};
  Vec6 arm_tau = Vec6::Zero();
};

enum class StepStatus { Ok, TrackingLost };

// The full visual-servoing control loop: features -> observer -> references
// -> MPC + torque laws.
class ServoController {
 public:
  ServoController(const KinematicModel& model, const ControllerConfig& cfg);

  StepStatus step(const Measurement& meas, Actuation& act);
  const ControlTrace& trace() const { return trace_; }
  const ObserverState& observerState() const { return observer_; }
  bool observerInitialized() const { return observer_initialized_; }

 private:
  Vec3 depthAssist(const Vec3& h_o, const VirtualFeature& vf) const;
  void runMpc(const Measurement& meas);
  void legCommands(const Measurement& meas, Actuation& act);

  KinematicModel model_;
  ControllerConfig cfg_;
  ObserverState observer_;
  bool observer_initialized_ = false;
  std::optional<ReferenceIntegrator> reference_;
  Vec6 last_qd_arm_d_ = Vec6::Zero();
  MpcSolution last_mpc_;
  bool have_mpc_ = false;
  long step_count_ = 0;
  std::array<Vec3, kNumLegs> liftoff_pos_B_{};
  std::array<bool, kNumLegs> was_stance_{true, true, true, true};
  std::array<Vec3, kNumLegs> stance_hold_B_{};
  ControlTrace trace_;
};

}  // namespace qm
