#include "qmservo/arm_control.hpp"

#include <stdexcept>

namespace qm {

void ArmGains::validate() const {
  if ((kp.array() <= 0).any() || (kd.array() <= 0).any()) {
    throw std::invalid_argument("ArmGains: diagonals must be strictly positive");
  }
}

ArmTorqueResult armTorque(const KinematicModel& model, const Vec6& q_d, const Vec6& qd_d,
                          const Vec6& qdd_d, const RobotState& state, const ArmGains& gains,
                          double gravity) {
  ArmTorqueResult out;
  CoupledArmDynamics dyn;
  try {
    dyn = coupledArmDynamics(model, state, gravity);
  } catch (const std::runtime_error&) {
    out.tau.setZero();
    out.fault = true;
    return out;
  }
  const Vec6 e = q_d - state.armPosition();
  const Vec6 ed = qd_d - state.armVelocity();
  const Vec6 qdd_cmd = qdd_d + gains.kd.asDiagonal() * ed + gains.kp.asDiagonal() * e;
  out.tau = dyn.M_fl * qdd_cmd + dyn.n_fl;

  if (!out.tau.allFinite()) {
    out.tau.setZero();
    out.fault = true;
    return out;
  }
  for (int i = 0; i < 6; ++i) {
    if (std::abs(out.tau[i]) > gains.tau_max) {
      out.tau[i] = std::copysign(gains.tau_max, out.tau[i]);
      out.saturated = true;
    }
  }
  return out;
}

}  // namespace qm
