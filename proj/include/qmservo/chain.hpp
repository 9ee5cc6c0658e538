#pragma once

#include <vector>

#include "qmservo/types.hpp"

namespace qm {

// One revolute joint plus the rigid link that moves with it.
// The joint frame is reached from the parent joint frame by the fixed
// transform, then rotates about `axis` (unit vector, joint frame) by q.
// Link inertia is given about the link com, in the joint frame.
struct JointLink {
  Pose fixed;
  Vec3 axis = Vec3::UnitZ();
  double mass = 0.0;
  Vec3 com = Vec3::Zero();
  Mat3 inertia = Mat3::Zero();
};

// Serial kinematic chain rooted at an arbitrary base frame, used for both the
// 6-DOF arm (rooted at S) and the 3-DOF legs (rooted at B).
class SerialChain {
 public:
  std::vector<JointLink> links;
  Pose tool;  // fixed transform from the last joint frame to the end-effector

  int dof() const { return static_cast<int>(links.size()); }

  // Pose of the end-effector frame in the chain base frame.
  Pose forward(const VecX& q) const;

  // Per-joint frames in the chain base frame (joint i frame after its rotation).
  std::vector<Pose> framesOf(const VecX& q) const;

  // 6xn geometric Jacobian in the chain base frame, linear rows on top.
  Mat6xX jacobian(const VecX& q) const;

  // Joint-space mass matrix via composite rigid bodies.
  MatX massMatrix(const VecX& q) const;

  // Generalized bias forces (Coriolis/centrifugal + gravity) at qdd = 0.
  // `gravity` is the gravitational acceleration vector in the chain base frame
  // (e.g. (0,0,-9.81)); base_omega/base_vel are the spatial velocity of the
  // chain base frame, expressed in the chain base frame.
  VecX biasForces(const VecX& q, const VecX& qd, const Vec3& gravity,
                  const Vec3& base_omega = Vec3::Zero(),
                  const Vec3& base_vel = Vec3::Zero()) const;

  // End-effector bias acceleration Jdot*qd (linear; angular), chain base frame,
  // with the chain base at rest.
  Vec6 endEffectorBiasAcc(const VecX& q, const VecX& qd) const;

  // 6xn momentum Jacobian at the chain base origin: column j is the spatial
  // momentum [linear; angular] of the whole chain per unit qd_j.
  Mat6xX momentumJacobian(const VecX& q) const;

  // Total kinetic energy of the links for given joint rates, chain base at rest.
  double kineticEnergy(const VecX& q, const VecX& qd) const;
};

}  // namespace qm
