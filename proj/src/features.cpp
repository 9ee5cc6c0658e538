#include "qmservo/features.hpp"

#include <stdexcept>

namespace qm {

FeaturePoint projectToSphere(const Vec2& q) {
  if (!q.allFinite()) throw std::invalid_argument("projectToSphere: non-finite point");
  const Vec3 ray(q.x(), q.y(), 1.0);
  return FeaturePoint{q, ray.normalized()};
}

CentroidFeature targetCentroid(const std::vector<FeaturePoint>& points) {
  if (points.size() < 2) {
    throw std::invalid_argument("targetCentroid: need at least two feature points");
  }
  CentroidFeature c;
  for (const auto& p : points) c.h += p.s;
  c.h /= static_cast<double>(points.size());
  c.has_L = false;
  return c;
}

CentroidFeature centroidOfPoints(const std::vector<Vec3>& Q_virtual) {
  if (Q_virtual.size() < 2) {
    throw std::invalid_argument("centroidOfPoints: need at least two points");
  }
  CentroidFeature c;
  for (const Vec3& Q : Q_virtual) {
    const double r = Q.norm();
    if (r < 1e-6) throw std::domain_error("centroidOfPoints: degenerate range");
    const Vec3 s = Q / r;
    c.h += s;
    c.L += (Mat3::Identity() - s * s.transpose()) / r;
  }
  const double m = static_cast<double>(Q_virtual.size());
  c.h /= m;
  c.L /= m;
  c.has_L = true;
  return c;
}

VirtualPointSet VirtualPointSet::standard() {
  // Four corners of a 0.1 m square, congruent with the target marker square,
  // centered 0.15 m below the end-effector origin (the grasp offset).
  VirtualPointSet vp;
  vp.frame = Frame::Inertial;
  vp.center_offset = Vec3(0, 0, -0.15);
  const double a = 0.05;
  vp.offsets = {{a, a, 0}, {a, -a, 0}, {-a, a, 0}, {-a, -a, 0}};
  return vp;
}

VirtualFeature virtualCentroid(const KinematicModel& model, const RobotState& state,
                               const VirtualPointSet& vp) {
  const Pose T_SE = model.armForward(state.armPosition());
  const Pose T_CS = model.T_BC.inverse() * model.T_BS;  // frame S in camera frame
  const Vec3 O_e = T_CS * T_SE.t;
  const Mat3 R_CS = T_CS.R;

  VirtualFeature out;
  out.R_cam_to_virtual = virtualPlaneRotation(state.phi_B, model.T_BC.R);
  out.J_t.setZero();
  out.Q_cam.reserve(vp.offsets.size());

  if (vp.frame == VirtualPointSet::Frame::Effector) {
    const Mat3 R_SE = T_SE.R;
    for (const Vec3& d : vp.offsets) {
      out.Q_cam.push_back(O_e + R_CS * (R_SE * d));
      Mat3x6 J_ti;
      J_ti.leftCols<3>() = Mat3::Identity();
      J_ti.rightCols<3>() = -skew(R_SE * d);
      out.J_t += R_CS * J_ti;
    }
  } else {
    const Mat3 R_IB = eulerToRotation(state.phi_B);
    const Mat3 R_CI = (R_IB * model.T_BC.R).transpose();
    for (const Vec3& d : vp.offsets) {
      out.Q_cam.push_back(O_e + R_CI * (vp.center_offset + d));
    }
    // Inertial-fixed offsets do not move with the end-effector orientation.
    Mat3x6 J_ti = Mat3x6::Zero();
    J_ti.leftCols<3>() = Mat3::Identity();
    out.J_t = static_cast<double>(vp.offsets.size()) * (R_CS * J_ti);
  }
  out.J_t /= static_cast<double>(vp.offsets.size());

  std::vector<Vec3> Q_virtual;
  Q_virtual.reserve(out.Q_cam.size());
  for (const Vec3& Q : out.Q_cam) Q_virtual.push_back(out.R_cam_to_virtual * Q);
  out.centroid = centroidOfPoints(Q_virtual);
  return out;
}

Vec3 errorRate(const Vec3& e, const Vec3& omega_c, const Vec3& v_c, const Vec3& v_T,
               const Mat3& L_o, const Mat3& L_t, const Mat3& R_cam_to_virtual, const Mat3x6& J_t,
               const Mat6& J_e, const Vec6& qd_arm) {
  return -skew(omega_c) * e - L_o * (v_c - v_T) - L_t * R_cam_to_virtual * J_t * J_e * qd_arm;
}

}  // namespace qm
