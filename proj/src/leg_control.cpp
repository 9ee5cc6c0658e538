#include "qmservo/leg_control.hpp"

namespace qm {

LegTorqueResult legTorque(const KinematicModel& model, int leg, const LegCommand& cmd,
                          const RobotState& state, const LegGains& gains, double gravity) {
  const Vec3 q = state.legPosition(leg);
  const Vec3 qd = state.legVelocity(leg);

  Vec3 p_foot;
  Mat3 J;
  model.legKinematics(leg, q, p_foot, J);
  const Vec3 v_foot = J * qd;

  const Vec3 pd_force = gains.kp.asDiagonal() * (cmd.foot_ref_B - p_foot) +
                        gains.kd.asDiagonal() * (cmd.foot_vel_ref_B - v_foot);

  LegTorqueResult out;
  if (cmd.mode == LegMode::Stance) {
    const Mat3 R_IB = eulerToRotation(state.phi_B);
    out.tau = J.transpose() * (pd_force + R_IB.transpose() * cmd.grf_world);
    return out;
  }

  const SerialChain& chain = model.leg_chains[static_cast<size_t>(leg)];
  const Mat3 M = chain.massMatrix(q);
  Mat3 lambda_inv = J * M.inverse() * J.transpose();
  Eigen::LLT<Mat3> llt(lambda_inv);
  if (llt.info() != Eigen::Success || lambda_inv.determinant() < 1e-10) {
    lambda_inv.diagonal().array() += 1e-3;  // damped fallback near singularity
    out.damped_fallback = true;
  }
  const Mat3 lambda = lambda_inv.inverse();

  const Vec3 jdot_qd = chain.endEffectorBiasAcc(q, qd).head<3>();
  const Mat3 R_IB = eulerToRotation(state.phi_B);
  const Vec3 g_B = R_IB.transpose() * Vec3(0, 0, -gravity);
  const Vec3 n_leg = chain.biasForces(q, qd, g_B);

  out.tau = J.transpose() * (pd_force + lambda * (cmd.accel_ref_B - jdot_qd)) + n_leg;
  return out;
}

}  // namespace qm
