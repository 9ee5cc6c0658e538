#pragma once

#include <array>
#include <stdexcept>

#include "qmservo/chain.hpp"
#include "qmservo/types.hpp"

namespace qm {

// R = Rz(yaw) * Ry(pitch) * Rx(roll). Throws std::domain_error when
// |pitch| >= pi/2 - 1e-6 (gimbal singularity).
Mat3 eulerToRotation(const EulerZYX& angles);

// Inverse of eulerToRotation, valid away from the pitch singularity.
EulerZYX rotationToEuler(const Mat3& R);

Mat3 skew(const Vec3& v);

// Maps ZYX-Euler rates to the world-frame angular velocity.
Mat3 eulerRateToOmega(const EulerZYX& angles);

// Rotation from the actual camera frame to the virtual camera frame in which
// base roll and pitch are zeroed and yaw is retained:
//   x_virtual = R * x_camera,  R = (B_R_C)^T * Ry(pitch) * Rx(roll) * B_R_C.
// Identity when roll = pitch = 0.
Mat3 virtualPlaneRotation(const EulerZYX& phi_B, const Mat3& R_BC);

struct LegParams {
  Vec3 hip_offset;     // hip joint origin in frame B
  double side_sign;    // +1 left, -1 right (abduction link direction)
  double l_abd;        // lateral abduction link length
  double l_thigh;
  double l_calf;
};

// Fixed parameter table of the robot: 6-DOF arm on a quadruped base with
// 3-DOF legs, camera and arm-base extrinsics, and the rigid-body inertias
// used by the arm controller and the SRB model. All values are documented in
// docs/config_schema.md.
class KinematicModel {
 public:
  SerialChain arm;                       // rooted at frame S
  std::array<SerialChain, kNumLegs> leg_chains;  // rooted at frame B
  std::array<LegParams, kNumLegs> legs;
  Pose T_BC;  // camera frame in base frame
  Pose T_BS;  // arm base frame in base frame
  double base_mass = 0.0;
  Mat3 base_inertia = Mat3::Zero();  // about the base com (= base origin)

  static KinematicModel standard();

  Pose armForward(const Vec6& q_arm) const { return arm.forward(q_arm); }
  Mat6 armJacobian(const Vec6& q_arm) const { return arm.jacobian(q_arm); }

  // Foot position in frame B and the 3x3 foot Jacobian.
  void legKinematics(int leg, const Vec3& q_leg, Vec3& p_foot_B, Mat3& J) const;

  // Analytic leg inverse kinematics (knee-back branch). Throws
  // std::domain_error when the point is outside the leg workspace.
  Vec3 legInverse(int leg, const Vec3& p_foot_B) const;

  double totalMass() const;          // base + arm links (SRB convention)
  Mat3 compositeInertia() const;     // base inertia + nominal arm inertia about the base origin
};

// Coupled floating-base arm dynamics:
//   M_fl = M_arm - F^T M_B^{-1} F,  n_fl = n_arm - F^T M_B^{-1} n_B
// with F the base-referenced composite momentum Jacobian of the arm chain.
// Throws std::runtime_error if M_fl is not positive definite.
struct CoupledArmDynamics {
  Mat6 M_fl;
  Vec6 n_fl;
};
CoupledArmDynamics coupledArmDynamics(const KinematicModel& model, const RobotState& state,
                                      double gravity = 9.81);

}  // namespace qm
