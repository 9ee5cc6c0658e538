#pragma once

#include <Eigen/Dense>

namespace qm {

inline constexpr int kNumLegs = 4;
inline constexpr int kArmDof = 6;

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Vec12 = Eigen::Matrix<double, 12, 1>;
using Vec18 = Eigen::Matrix<double, 18, 1>;
using VecX = Eigen::VectorXd;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat3x6 = Eigen::Matrix<double, 3, 6>;
using Mat6xX = Eigen::Matrix<double, 6, Eigen::Dynamic>;
using MatX = Eigen::MatrixXd;

struct Pose {
  Mat3 R = Mat3::Identity();
  Vec3 t = Vec3::Zero();

  Pose operator*(const Pose& other) const { return {R * other.R, R * other.t + t}; }
  Vec3 operator*(const Vec3& p) const { return R * p + t; }
  Pose inverse() const { return {R.transpose(), -(R.transpose() * t)}; }
};

// ZYX-Euler parameterization of the base orientation, yaw-pitch-roll order.
struct EulerZYX {
  double yaw = 0.0;
  double pitch = 0.0;
  double roll = 0.0;
};

// Full state of the floating base plus 18 joints (12 leg, 6 arm).
// v_B and omega_B are expressed in the inertial frame.
struct RobotState {
  Vec3 p_B = Vec3::Zero();
  EulerZYX phi_B;
  Vec18 q_j = Vec18::Zero();
  Vec3 v_B = Vec3::Zero();
  Vec3 omega_B = Vec3::Zero();
  Vec18 qd_j = Vec18::Zero();

  Vec6 armPosition() const { return q_j.tail<6>(); }
  Vec6 armVelocity() const { return qd_j.tail<6>(); }
  Vec3 legPosition(int leg) const { return q_j.segment<3>(3 * leg); }
  Vec3 legVelocity(int leg) const { return qd_j.segment<3>(3 * leg); }
  void setArmPosition(const Vec6& q) { q_j.tail<6>() = q; }
  void setArmVelocity(const Vec6& qd) { qd_j.tail<6>() = qd; }
  void setLegPosition(int leg, const Vec3& q) { q_j.segment<3>(3 * leg) = q; }
  void setLegVelocity(int leg, const Vec3& qd) { qd_j.segment<3>(3 * leg) = qd; }
};

}  // namespace qm
