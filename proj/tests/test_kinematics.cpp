#include <doctest.h>

#include <random>

#include "qmservo/kinematics.hpp"

using namespace qm;

namespace {
std::mt19937 rng(42);
double uni(double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  return d(rng);
}
EulerZYX randomAngles() { return EulerZYX{uni(-3, 3), uni(-1.2, 1.2), uni(-3, 3)}; }
}  // namespace

TEST_CASE("euler rotation is orthonormal and round-trips") {
  for (int i = 0; i < 50; ++i) {
    const EulerZYX a = randomAngles();
    const Mat3 R = eulerToRotation(a);
    CHECK((R * R.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(R.determinant() == doctest::Approx(1.0).epsilon(1e-12));
    const EulerZYX b = rotationToEuler(R);
    CHECK((eulerToRotation(b) - R).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("euler rotation rejects the gimbal singularity") {
  CHECK_THROWS_AS(eulerToRotation(EulerZYX{0, M_PI / 2, 0}), std::domain_error);
  CHECK_THROWS_AS(eulerToRotation(EulerZYX{0, -M_PI / 2, 0}), std::domain_error);
}

TEST_CASE("skew matrix reproduces the cross product") {
  const Vec3 a(1.1, -2.2, 0.4), b(0.3, 0.9, -1.7);
  CHECK((skew(a) * b - a.cross(b)).norm() < 1e-15);
  CHECK((skew(a) + skew(a).transpose()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("euler rate map matches the rotation derivative") {
  const double eps = 1e-7;
  for (int i = 0; i < 20; ++i) {
    const EulerZYX a = randomAngles();
    const Vec3 rate(uni(-1, 1), uni(-1, 1), uni(-1, 1));  // (yaw, pitch, roll) rates
    const EulerZYX ap{a.yaw + eps * rate.x(), a.pitch + eps * rate.y(), a.roll + eps * rate.z()};
    const EulerZYX am{a.yaw - eps * rate.x(), a.pitch - eps * rate.y(), a.roll - eps * rate.z()};
    const Mat3 dR = (eulerToRotation(ap) - eulerToRotation(am)) / (2 * eps);
    const Mat3 W = dR * eulerToRotation(a).transpose();
    const Vec3 omega_fd(W(2, 1), W(0, 2), W(1, 0));
    const Vec3 omega = eulerRateToOmega(a) * rate;
    CHECK((omega - omega_fd).norm() < 1e-6);
  }
}

TEST_CASE("virtual plane rotation removes roll and pitch from camera coordinates") {
  const KinematicModel model = KinematicModel::standard();
  for (int i = 0; i < 20; ++i) {
    const EulerZYX a = randomAngles();
    const Mat3 R_vc = virtualPlaneRotation(a, model.T_BC.R);
    // Mapping camera coordinates through R_vc must equal the coordinates seen
    // by a camera on a base with the same yaw but zero roll/pitch.
    const Mat3 R_IC = eulerToRotation(a) * model.T_BC.R;
    const Mat3 R_IC_level = eulerToRotation(EulerZYX{a.yaw, 0, 0}) * model.T_BC.R;
    CHECK((R_vc * R_IC.transpose() - R_IC_level.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  }
  CHECK((virtualPlaneRotation(EulerZYX{1.3, 0, 0}, model.T_BC.R) - Mat3::Identity())
            .cwiseAbs()
            .maxCoeff() < 1e-14);
}

TEST_CASE("leg inverse kinematics round-trips the forward map") {
  const KinematicModel model = KinematicModel::standard();
  for (int leg = 0; leg < kNumLegs; ++leg) {
    // Position round-trip FK(IK(p)) = p holds on the whole reachable set,
    // independent of which joint-space branch the IK picks.
    for (int i = 0; i < 50; ++i) {
      const Vec3 q(uni(-0.5, 0.5), uni(-0.8, 0.8), uni(0.3, 2.4));
      Vec3 p;
      Mat3 J;
      model.legKinematics(leg, q, p, J);
      Vec3 q_ik;
      try {
        q_ik = model.legInverse(leg, p);
      } catch (const std::domain_error&) {
        continue;  // sampled pose folded outside the IK branch domain
      }
      Vec3 p_rt;
      model.legKinematics(leg, q_ik, p_rt, J);
      CHECK((p_rt - p).norm() < 1e-9);
    }
    // Near the nominal stance the IK must recover the exact joint vector.
    for (int i = 0; i < 50; ++i) {
      const Vec3 q(uni(-0.3, 0.3), uni(-0.4, 0.4), uni(0.6, 1.6));
      Vec3 p;
      Mat3 J;
      model.legKinematics(leg, q, p, J);
      const Vec3 q_ik = model.legInverse(leg, p);
      CHECK((q_ik - q).norm() < 1e-9);
    }
  }
}

TEST_CASE("leg inverse kinematics rejects unreachable points") {
  const KinematicModel model = KinematicModel::standard();
  CHECK_THROWS_AS(model.legInverse(0, Vec3(2.0, 0.15, -1.5)), std::domain_error);
  CHECK_THROWS_AS(model.legInverse(0, model.legs[0].hip_offset), std::domain_error);
}

TEST_CASE("leg Jacobian matches finite differences") {
  const KinematicModel model = KinematicModel::standard();
  const double eps = 1e-6;
  for (int leg = 0; leg < kNumLegs; ++leg) {
    for (int i = 0; i < 10; ++i) {
      const Vec3 q(uni(-0.5, 0.5), uni(-0.8, 0.8), uni(0.3, 2.4));
      Vec3 p;
      Mat3 J;
      model.legKinematics(leg, q, p, J);
      for (int j = 0; j < 3; ++j) {
        Vec3 qp = q, qm_ = q;
        qp[j] += eps;
        qm_[j] -= eps;
        Vec3 pp, pm;
        Mat3 tmp;
        model.legKinematics(leg, qp, pp, tmp);
        model.legKinematics(leg, qm_, pm, tmp);
        CHECK((J.col(j) - (pp - pm) / (2 * eps)).norm() < 1e-6);
      }
    }
  }
}

TEST_CASE("coupled arm inertia is symmetric positive definite") {
  const KinematicModel model = KinematicModel::standard();
  for (int i = 0; i < 20; ++i) {
    RobotState st;
    st.phi_B = EulerZYX{uni(-1, 1), uni(-0.3, 0.3), uni(-0.3, 0.3)};
    Vec6 q;
    for (int j = 0; j < 6; ++j) q[j] = uni(-1.5, 1.5);
    st.setArmPosition(q);
    const CoupledArmDynamics d = coupledArmDynamics(model, st);
    CHECK((d.M_fl - d.M_fl.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    Eigen::SelfAdjointEigenSolver<Mat6> es(d.M_fl);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
    // The reduction can only remove inertia relative to the fixed-base arm.
    const MatX M_arm = model.arm.massMatrix(q);
    Eigen::SelfAdjointEigenSolver<MatX> es2(M_arm - d.M_fl);
    CHECK(es2.eigenvalues().minCoeff() > -1e-12);
  }
}

TEST_CASE("coupled arm inertia approaches the fixed-base inertia for a heavy base") {
  KinematicModel model = KinematicModel::standard();
  model.base_mass = 1e9;
  model.base_inertia = 1e9 * Mat3::Identity();
  RobotState st;
  Vec6 q;
  q << 0.3, 0.7, -1.1, 0.4, 0.6, -0.2;
  st.setArmPosition(q);
  const CoupledArmDynamics d = coupledArmDynamics(model, st);
  const MatX M_arm = model.arm.massMatrix(q);
  CHECK((d.M_fl - M_arm).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("composite inertia is symmetric positive definite") {
  const KinematicModel model = KinematicModel::standard();
  const Mat3 I = model.compositeInertia();
  CHECK((I - I.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  Eigen::SelfAdjointEigenSolver<Mat3> es(I);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
  CHECK(model.totalMass() > model.base_mass);
}
