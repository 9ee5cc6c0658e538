#pragma once

#include <vector>

#include "qmservo/kinematics.hpp"
#include "qmservo/types.hpp"

namespace qm {

// A point on the normalized focal-length image plane and its spherical
// projection s = (x, y, 1)/|(x, y, 1)|.
struct FeaturePoint {
  Vec2 q;
  Vec3 s;
};

FeaturePoint projectToSphere(const Vec2& q);

// Spherical centroid h and interaction gain L = mean of pi_s / range.
// L is only populated where per-point ranges are known (virtual feature).
struct CentroidFeature {
  Vec3 h = Vec3::Zero();
  Mat3 L = Mat3::Zero();
  bool has_L = false;
};

// h_o of the target feature points. Ranges are unknown, so L is marked
// unavailable. Throws std::invalid_argument for fewer than two points.
CentroidFeature targetCentroid(const std::vector<FeaturePoint>& points);

// Centroid of already-remapped virtual points Q' (virtual camera frame,
// meters). Populates L = mean(pi_s / |Q'|). Throws std::domain_error when any
// |Q'| < 1e-6.
CentroidFeature centroidOfPoints(const std::vector<Vec3>& Q_virtual);

inline Vec3 visualError(const Vec3& h_o, const Vec3& h_t) { return h_o - h_t; }

// How the fixed virtual-point offsets are attached:
//   Effector - offsets rotate with the end-effector frame (paper convention);
//   Inertial - offsets fixed in the inertial frame, centered center_offset
//              away from the end-effector origin (grasp-point convention).
struct VirtualPointSet {
  enum class Frame { Effector, Inertial };
  Frame frame = Frame::Inertial;
  std::vector<Vec3> offsets;
  Vec3 center_offset = Vec3::Zero();  // inertial mode only

  static VirtualPointSet standard();
};

// Virtual manipulator feature: h_t / L_t in the virtual camera frame plus the
// mean point Jacobian J_t (camera-frame point velocity per end-effector twist
// in frame S) and the cam-to-virtual rotation used for the remap.
struct VirtualFeature {
  CentroidFeature centroid;
  Mat3x6 J_t;
  Mat3 R_cam_to_virtual;
  std::vector<Vec3> Q_cam;  // raw virtual points, camera frame
};

VirtualFeature virtualCentroid(const KinematicModel& model, const RobotState& state,
                               const VirtualPointSet& vp);

// Analytic visual-error rate
//   e_dot = -[Omega_c]x e - L_o (v_c - v_T) - L_t R_cv J_t J_e qd_arm
// used for verification only (L_o needs ground-truth depth).
Vec3 errorRate(const Vec3& e, const Vec3& omega_c, const Vec3& v_c, const Vec3& v_T,
               const Mat3& L_o, const Mat3& L_t, const Mat3& R_cam_to_virtual, const Mat3x6& J_t,
               const Mat6& J_e, const Vec6& qd_arm);

}  // namespace qm
