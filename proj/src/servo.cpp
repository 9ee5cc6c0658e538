#include "qmservo/servo.hpp"

#include <stdexcept>

#include "qmservo/kinematics.hpp"

namespace qm {

void ServoGains::validate() const {
  if ((kb.array() <= 0).any() || (ka.array() <= 0).any() || qd_arm_max <= 0) {
    throw std::invalid_argument("ServoGains: gains and rate clamp must be strictly positive");
  }
}

Vec3 baseReferenceVelocity(const Vec3& e, const Vec3& v_T_cam, const Vec3& omega_B,
                           const Mat3& R_IC, const Mat3& R_IB, const Vec3& t_BC,
                           const ServoGains& gains) {
  return R_IC * (gains.kb.asDiagonal() * e + v_T_cam) + R_IB * skew(t_BC) * omega_B;
}

Vec6 armReferenceRate(const Vec3& e, const Mat3& L_t, const Mat3& R_cam_to_virtual,
                      const Mat3x6& J_t, const Mat6& J_e, const Vec3& ka) {
  const Mat3x6 A = L_t * R_cam_to_virtual * J_t * J_e;
  Eigen::JacobiSVD<Mat3x6> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.singularValues()(2) < 1e-8) {
    throw std::runtime_error("armReferenceRate: composed matrix near rank deficiency");
  }
  const Vec3 target = ka.asDiagonal() * e;
  // Minimum-norm solution A^+ target. Directions much weaker than the dominant
  // one (the range direction of the centroid) are truncated rather than
  // inverted so they cannot dominate the joint rates.
  Vec6 qd = Vec6::Zero();
  for (int i = 0; i < 3; ++i) {
    if (svd.singularValues()(i) < 0.01 * svd.singularValues()(0)) continue;
    qd += (svd.matrixU().col(i).dot(target) / svd.singularValues()(i)) * svd.matrixV().col(i);
  }
  return qd;
}

ReferenceIntegrator::ReferenceIntegrator(const Vec3& p0, double yaw0, const Vec6& q_arm0)
    : p_d_(p0), yaw0_(yaw0), q_arm_d_(q_arm0) {}

void ReferenceIntegrator::step(const Vec3& v_B_d, const Vec6& qd_arm_d, double dt) {
  p_d_ += dt * v_B_d;
  v_d_ = v_B_d;
  if (first_) {
    qdd_arm_d_.setZero();
    first_ = false;
  } else {
    qdd_arm_d_ = (qd_arm_d - qd_arm_d_) / dt;
  }
  q_arm_d_ += dt * qd_arm_d;
  qd_arm_d_ = qd_arm_d;
}

BaseReferenceSample ReferenceIntegrator::baseSample() const {
  return BaseReferenceSample{EulerZYX{yaw0_, 0.0, 0.0}, p_d_, Vec3::Zero(), v_d_};
}

std::vector<BaseReferenceSample> ReferenceIntegrator::horizon(int steps, double dt_mpc) const {
  std::vector<BaseReferenceSample> out;
  out.reserve(static_cast<size_t>(steps));
  Vec3 p = p_d_;
  for (int k = 0; k < steps; ++k) {
    p += dt_mpc * v_d_;
    out.push_back(BaseReferenceSample{EulerZYX{yaw0_, 0.0, 0.0}, p, Vec3::Zero(), v_d_});
  }
  return out;
}

}  // namespace qm
