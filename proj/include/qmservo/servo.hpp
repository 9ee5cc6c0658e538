#pragma once

#include <vector>

#include "qmservo/types.hpp"

namespace qm {

struct ServoGains {
  Vec3 kb = Vec3(1.2, 1.2, 1.2);  // base gain diagonal, 1/s
  Vec3 ka = Vec3(2.0, 2.0, 2.0);  // arm gain diagonal (applied in feature space), 1/s
  double qd_arm_max = 1.5;        // joint-rate norm clamp on the arm reference, rad/s

  void validate() const;
};

// v_B^d = I_R_c (K_b e + v_T^c) + I_R_B [B_t_C]x omega_B
Vec3 baseReferenceVelocity(const Vec3& e, const Vec3& v_T_cam, const Vec3& omega_B,
                           const Mat3& R_IC, const Mat3& R_IB, const Vec3& t_BC,
                           const ServoGains& gains);

// qd_arm^d = K_a (L_t R_cv J_t J_e)^+ e, minimum-norm via SVD pseudo-inverse.
// Throws std::runtime_error when the composed 3x6 matrix has row rank < 3 at
// tolerance 1e-8 (callers freeze the previous arm reference for that step).
Vec6 armReferenceRate(const Vec3& e, const Mat3& L_t, const Mat3& R_cam_to_virtual,
                      const Mat3x6& J_t, const Mat6& J_e, const Vec3& ka);

// One sample of the base reference handed to the MPC.
struct BaseReferenceSample {
  EulerZYX phi_d;   // (yaw0, 0, 0)
  Vec3 p_d;
  Vec3 omega_d;     // always zero
  Vec3 v_d;
};

// Accumulates v_B^d and qd_arm^d streams into continuous references:
// p_B^d by Euler integration, desired yaw frozen at the initial yaw,
// qdd_arm^d by backward differencing (zero on the first step).
class ReferenceIntegrator {
 public:
  ReferenceIntegrator(const Vec3& p0, double yaw0, const Vec6& q_arm0);

  void step(const Vec3& v_B_d, const Vec6& qd_arm_d, double dt);

  BaseReferenceSample baseSample() const;
  // Constant-velocity extrapolation of the base reference over an MPC horizon.
  std::vector<BaseReferenceSample> horizon(int steps, double dt_mpc) const;

  const Vec6& armPosition() const { return q_arm_d_; }
  const Vec6& armRate() const { return qd_arm_d_; }
  const Vec6& armAcceleration() const { return qdd_arm_d_; }

 private:
  Vec3 p_d_;
  double yaw0_;
  Vec3 v_d_ = Vec3::Zero();
  Vec6 q_arm_d_;
  Vec6 qd_arm_d_ = Vec6::Zero();
  Vec6 qdd_arm_d_ = Vec6::Zero();
  bool first_ = true;
};

}  // namespace qm
