#pragma once

#include "qmservo/kinematics.hpp"
#include "qmservo/types.hpp"

namespace qm {

struct ArmGains {
  Vec6 kp = Vec6::Constant(100.0);
  Vec6 kd = Vec6::Constant(20.0);
  double tau_max = 30.0;  // per-joint saturation, N*m

  void validate() const;
};

struct ArmTorqueResult {
  Vec6 tau;
  bool saturated = false;
  bool fault = false;  // non-finite dynamics terms, zero-torque safe output
};

// Computed-torque law with floating-base coupling:
//   qdd_cmd = qdd_d + Kd (qd_d - qd) + Kp (q_d - q)
//   tau     = M_fl qdd_cmd + n_fl
ArmTorqueResult armTorque(const KinematicModel& model, const Vec6& q_d, const Vec6& qd_d,
                          const Vec6& qdd_d, const RobotState& state, const ArmGains& gains,
                          double gravity = 9.81);

}  // namespace qm
