#pragma once

#include "qmservo/kinematics.hpp"
#include "qmservo/types.hpp"

namespace qm {

struct LegGains {
  Vec3 kp = Vec3(500, 500, 500);
  Vec3 kd = Vec3(20, 20, 20);
  double k_step = 0.03;       // Raibert velocity-error gain, seconds
  double swing_height = 0.08;
};

enum class LegMode { Stance, Swing };

struct LegCommand {
  LegMode mode = LegMode::Stance;
  Vec3 foot_ref_B = Vec3::Zero();
  Vec3 foot_vel_ref_B = Vec3::Zero();
  Vec3 accel_ref_B = Vec3::Zero();   // swing only
  Vec3 grf_world = Vec3::Zero();     // stance only
};

struct LegTorqueResult {
  Vec3 tau;
  bool damped_fallback = false;  // operational-space inertia was near singular
};

// tau = J' [Kp (p_ref - p) + Kd (v_ref - v)] + tau_ff with
//   stance: tau_ff = J' R_IB' f
//   swing:  tau_ff = J' Lambda (a_ref - Jdot qd) + n_leg
LegTorqueResult legTorque(const KinematicModel& model, int leg, const LegCommand& cmd,
                          const RobotState& state, const LegGains& gains, double gravity = 9.81);

}  // namespace qm
