#include <doctest.h>

#include <random>

#include "qmservo/features.hpp"

using namespace qm;

namespace {
std::mt19937 rng(5);
double uni(double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  return d(rng);
}
}  // namespace

TEST_CASE("spherical projection is unit norm and aligned with the ray") {
  const FeaturePoint f = projectToSphere(Vec2(0.3, -0.4));
  CHECK(f.s.norm() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(f.s.z() > 0);
  CHECK(f.s.x() / f.s.z() == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(f.s.y() / f.s.z() == doctest::Approx(-0.4).epsilon(1e-12));
  CHECK_THROWS_AS(projectToSphere(Vec2(std::nan(""), 0)), std::invalid_argument);
}

TEST_CASE("target centroid averages unit vectors and needs two points") {
  std::vector<FeaturePoint> pts = {projectToSphere(Vec2(0.1, 0.0)),
                                   projectToSphere(Vec2(-0.1, 0.0))};
  const CentroidFeature c = targetCentroid(pts);
  CHECK((c.h - 0.5 * (pts[0].s + pts[1].s)).norm() < 1e-15);
  CHECK_FALSE(c.has_L);
  CHECK_THROWS_AS(targetCentroid({pts[0]}), std::invalid_argument);
}

TEST_CASE("point centroid interaction gain matches the per-point projector mean") {
  std::vector<Vec3> Q = {Vec3(0.2, 0.1, 1.5), Vec3(-0.3, 0.2, 2.0), Vec3(0.1, -0.2, 1.0)};
  const CentroidFeature c = centroidOfPoints(Q);
  Mat3 L = Mat3::Zero();
  Vec3 h = Vec3::Zero();
  for (const Vec3& q : Q) {
    const Vec3 s = q.normalized();
    h += s;
    L += (Mat3::Identity() - s * s.transpose()) / q.norm();
  }
  CHECK((c.h - h / 3.0).norm() < 1e-15);
  CHECK((c.L - L / 3.0).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(c.has_L);
  CHECK_THROWS_AS(centroidOfPoints({Vec3(0, 0, 1e-9), Vec3(0, 0, 1)}), std::domain_error);
}

TEST_CASE("interaction gain is symmetric positive semidefinite with unit-bounded range scale") {
  for (int i = 0; i < 20; ++i) {
    std::vector<Vec3> Q;
    for (int k = 0; k < 4; ++k) Q.push_back(Vec3(uni(-1, 1), uni(-1, 1), uni(0.5, 3)));
    const CentroidFeature c = centroidOfPoints(Q);
    CHECK((c.L - c.L.transpose()).cwiseAbs().maxCoeff() < 1e-14);
    Eigen::SelfAdjointEigenSolver<Mat3> es(c.L);
    CHECK(es.eigenvalues().minCoeff() > -1e-14);
  }
}

TEST_CASE("virtual feature error vanishes exactly on the grasp offset") {
  // Place the marker square so its grasp point coincides with the current
  // end-effector position; observed and virtual centroids must then agree.
  const KinematicModel model = KinematicModel::standard();
  RobotState st;
  st.p_B = Vec3(0, 0, 0.40);
  st.phi_B = EulerZYX{0.3, 0.05, -0.04};
  Vec6 q;
  q << 0.2, 0.6, -1.1, 0.1, 0.4, 0.0;
  st.setArmPosition(q);

  const VirtualPointSet vp = VirtualPointSet::standard();
  const Pose base{eulerToRotation(st.phi_B), st.p_B};
  const Vec3 ee_world = (base * model.T_BS * model.armForward(q)).t;
  const Vec3 marker_center = ee_world + vp.center_offset;  // 0.15 m below

  const Pose T_IC = base * model.T_BC;
  std::vector<FeaturePoint> observed;
  for (const Vec3& d : vp.offsets) {
    const Vec3 Q = T_IC.R.transpose() * (marker_center + d - T_IC.t);
    observed.push_back(projectToSphere(Vec2(Q.x() / Q.z(), Q.y() / Q.z())));
  }
  const Mat3 R_vc = virtualPlaneRotation(st.phi_B, model.T_BC.R);
  Vec3 h_o = Vec3::Zero();
  for (const auto& f : observed) h_o += R_vc * f.s;
  h_o /= static_cast<double>(observed.size());

  const VirtualFeature vf = virtualCentroid(model, st, vp);
  CHECK((h_o - vf.centroid.h).norm() < 1e-12);
}

TEST_CASE("virtual point Jacobian matches finite differences over arm motion") {
  const KinematicModel model = KinematicModel::standard();
  const double eps = 1e-6;
  for (auto frame : {VirtualPointSet::Frame::Inertial, VirtualPointSet::Frame::Effector}) {
    VirtualPointSet vp = VirtualPointSet::standard();
    vp.frame = frame;
    for (int trial = 0; trial < 10; ++trial) {
      RobotState st;
      st.p_B = Vec3(0, 0, 0.40);
      Vec6 q, qd;
      for (int j = 0; j < 6; ++j) {
        q[j] = uni(-1.0, 1.0);
        qd[j] = uni(-1.0, 1.0);
      }
      st.setArmPosition(q);
      const VirtualFeature vf = virtualCentroid(model, st, vp);
      const Mat6 J_e = model.armJacobian(q);

      RobotState sp = st, sm = st;
      sp.setArmPosition(q + eps * qd);
      sm.setArmPosition(q - eps * qd);
      Vec3 mean_p = Vec3::Zero(), mean_m = Vec3::Zero();
      const auto Qp = virtualCentroid(model, sp, vp).Q_cam;
      const auto Qm = virtualCentroid(model, sm, vp).Q_cam;
      for (size_t k = 0; k < Qp.size(); ++k) {
        mean_p += Qp[k];
        mean_m += Qm[k];
      }
      const Vec3 fd = (mean_p - mean_m) / (2 * eps * static_cast<double>(Qp.size()));
      const Vec3 analytic = vf.J_t * (J_e * qd);
      CHECK((analytic - fd).norm() < 1e-5);
    }
  }
}

TEST_CASE("effector-frame offsets rotate with the tool, inertial offsets do not") {
  const KinematicModel model = KinematicModel::standard();
  RobotState a, b;
  a.p_B = b.p_B = Vec3(0, 0, 0.40);
  Vec6 qa, qb;
  qa << 0, 0.5, -1.0, 0, 0.5, 0;
  qb = qa;
  qb[5] += 1.0;  // wrist roll only: end-effector origin fixed, orientation changes

  VirtualPointSet eff = VirtualPointSet::standard();
  eff.frame = VirtualPointSet::Frame::Effector;
  a.setArmPosition(qa);
  b.setArmPosition(qb);
  const auto Qa = virtualCentroid(model, a, eff).Q_cam;
  const auto Qb = virtualCentroid(model, b, eff).Q_cam;
  CHECK((Qa[0] - Qb[0]).norm() > 1e-3);

  const VirtualPointSet inert = VirtualPointSet::standard();
  const auto Qa2 = virtualCentroid(model, a, inert).Q_cam;
  const auto Qb2 = virtualCentroid(model, b, inert).Q_cam;
  CHECK((Qa2[0] - Qb2[0]).norm() < 1e-12);
}
