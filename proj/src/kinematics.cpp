#include "qmservo/kinematics.hpp"

#include <cmath>

namespace qm {

namespace {
constexpr double kPitchLimit = M_PI / 2.0 - 1e-6;
}

Mat3 eulerToRotation(const EulerZYX& angles) {
  if (std::abs(angles.pitch) >= kPitchLimit) {
    throw std::domain_error("eulerToRotation: pitch at gimbal singularity");
  }
  return (Eigen::AngleAxisd(angles.yaw, Vec3::UnitZ()) *
          Eigen::AngleAxisd(angles.pitch, Vec3::UnitY()) *
          Eigen::AngleAxisd(angles.roll, Vec3::UnitX()))
      .toRotationMatrix();
}

EulerZYX rotationToEuler(const Mat3& R) {
  EulerZYX e;
  e.pitch = std::asin(-R(2, 0));
  e.yaw = std::atan2(R(1, 0), R(0, 0));
  e.roll = std::atan2(R(2, 1), R(2, 2));
  return e;
}

Mat3 skew(const Vec3& v) {
  Mat3 S;
  S << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return S;
}

Mat3 eulerRateToOmega(const EulerZYX& a) {
  // omega_world = E * [yaw_dot, pitch_dot, roll_dot]
  const double cy = std::cos(a.yaw), sy = std::sin(a.yaw);
  const double cp = std::cos(a.pitch), sp = std::sin(a.pitch);
  Mat3 E;
  E.col(0) = Vec3(0, 0, 1);
  E.col(1) = Vec3(-sy, cy, 0);
  E.col(2) = Vec3(cy * cp, sy * cp, -sp);
  return E;
}

Mat3 virtualPlaneRotation(const EulerZYX& phi_B, const Mat3& R_BC) {
  const Mat3 tilt = (Eigen::AngleAxisd(phi_B.pitch, Vec3::UnitY()) *
                     Eigen::AngleAxisd(phi_B.roll, Vec3::UnitX()))
                        .toRotationMatrix();
  return R_BC.transpose() * tilt * R_BC;
}

void KinematicModel::legKinematics(int leg, const Vec3& q_leg, Vec3& p_foot_B, Mat3& J) const {
  const SerialChain& chain = leg_chains[static_cast<size_t>(leg)];
  p_foot_B = chain.forward(q_leg).t;
  J = chain.jacobian(q_leg).topRows<3>();
}

Vec3 KinematicModel::legInverse(int leg, const Vec3& p_foot_B) const {
  const LegParams& lp = legs[static_cast<size_t>(leg)];
  const Vec3 p = p_foot_B - lp.hip_offset;
  const double l1 = lp.side_sign * lp.l_abd;
  const double d_yz2 = p.y() * p.y() + p.z() * p.z();
  const double z_r2 = d_yz2 - l1 * l1;
  if (z_r2 < 1e-12) throw std::domain_error("legInverse: point inside abduction cylinder");
  const double z_r = -std::sqrt(z_r2);
  const double q1 = std::atan2(p.z(), p.y()) - std::atan2(z_r, l1);

  const double x_r = p.x();
  const double rho2 = x_r * x_r + z_r2;
  const double l2 = lp.l_thigh, l3 = lp.l_calf;
  double c3 = (rho2 - l2 * l2 - l3 * l3) / (2.0 * l2 * l3);
  if (c3 > 1.0 + 1e-9 || c3 < -1.0 - 1e-9) {
    throw std::domain_error("legInverse: point outside leg workspace");
  }
  c3 = std::clamp(c3, -1.0, 1.0);
  const double q3 = std::acos(c3);  // knee-back branch
  const double q2 = std::atan2(-x_r, -z_r) - std::atan2(l3 * std::sin(q3), l2 + l3 * c3);

  Vec3 q(std::remainder(q1, 2 * M_PI), std::remainder(q2, 2 * M_PI), q3);
  return q;
}

double KinematicModel::totalMass() const {
  double m = base_mass;
  for (const auto& link : arm.links) m += link.mass;
  return m;
}

Mat3 KinematicModel::compositeInertia() const {
  Mat3 I = base_inertia;
  const VecX q0 = VecX::Zero(arm.dof());
  const auto frames = arm.framesOf(q0);
  for (int k = 0; k < arm.dof(); ++k) {
    const Pose in_B = T_BS * frames[static_cast<size_t>(k)];
    const Vec3 c = in_B * arm.links[static_cast<size_t>(k)].com;
    const Mat3 Iw = in_B.R * arm.links[static_cast<size_t>(k)].inertia * in_B.R.transpose();
    const double m = arm.links[static_cast<size_t>(k)].mass;
    I += Iw + m * (c.squaredNorm() * Mat3::Identity() - c * c.transpose());
  }
  return I;
}

CoupledArmDynamics coupledArmDynamics(const KinematicModel& model, const RobotState& state,
                                      double gravity) {
  const Vec6 q = state.armPosition();
  const Vec6 qd = state.armVelocity();
  const Mat3 R_IB = eulerToRotation(state.phi_B);
  const Mat3 R_BS = model.T_BS.R;
  const Mat3 R_SB = R_BS.transpose();

  const Vec3 omega_B = R_IB.transpose() * state.omega_B;
  const Vec3 g_B = R_IB.transpose() * Vec3(0, 0, -gravity);
  const Vec3 omega_S = R_SB * omega_B;
  const Vec3 g_S = R_SB * g_B;
  const Vec3 v_S = R_SB * (R_IB.transpose() * state.v_B + omega_B.cross(model.T_BS.t));

  const MatX M_arm = model.arm.massMatrix(q);
  const VecX n_arm = model.arm.biasForces(q, qd, g_S, omega_S, v_S);

  // Coupling block: arm momentum referenced to the base origin, base frame,
  // ordered [linear; angular] to match M_B over [v_B; omega_B].
  const Mat6xX F_S = model.arm.momentumJacobian(q);
  Mat6 F;
  F.topRows<3>() = R_BS * F_S.topRows<3>();
  F.bottomRows<3>() =
      R_BS * F_S.bottomRows<3>() + skew(model.T_BS.t) * (R_BS * F_S.topRows<3>());

  // Locked spatial inertia of base + arm about the base origin. Using the
  // bare base inertia here would break positive definiteness of the Schur
  // complement below.
  double m_tot = model.base_mass;
  Vec3 mc = Vec3::Zero();  // first mass moment about the base origin
  Mat3 I_lock = model.base_inertia;
  const auto frames = model.arm.framesOf(q);
  for (size_t k = 0; k < model.arm.links.size(); ++k) {
    const JointLink& link = model.arm.links[k];
    const Pose in_B = model.T_BS * frames[k];
    const Vec3 c = in_B * link.com;
    m_tot += link.mass;
    mc += link.mass * c;
    I_lock += in_B.R * link.inertia * in_B.R.transpose() +
              link.mass * (c.squaredNorm() * Mat3::Identity() - c * c.transpose());
  }
  Mat6 M_B = Mat6::Zero();
  M_B.topLeftCorner<3, 3>() = m_tot * Mat3::Identity();
  M_B.topRightCorner<3, 3>() = -skew(mc);
  M_B.bottomLeftCorner<3, 3>() = skew(mc);
  M_B.bottomRightCorner<3, 3>() = I_lock;

  Vec6 n_B;
  n_B.head<3>() = -m_tot * g_B;
  n_B.tail<3>() = -mc.cross(g_B) + omega_B.cross(I_lock * omega_B);

  const Mat6 M_B_inv = M_B.inverse();
  CoupledArmDynamics out;
  out.M_fl = M_arm - F.transpose() * M_B_inv * F;
  out.M_fl = 0.5 * (out.M_fl + out.M_fl.transpose().eval());
  out.n_fl = n_arm - F.transpose() * M_B_inv * n_B;

  const Eigen::LLT<Mat6> llt(out.M_fl);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("coupledArmDynamics: M_fl is not positive definite");
  }
  return out;
}

KinematicModel KinematicModel::standard() {
  KinematicModel m;
  m.base_mass = 22.0;
  m.base_inertia = Vec3(0.24, 0.85, 0.94).asDiagonal();
  m.T_BS = Pose{Mat3::Identity(), Vec3(0.20, 0.0, 0.10)};

  // Forward-down camera: x right, y down, z optical axis, pitched down 0.35 rad.
  const double th = 0.35;
  Mat3 R_BC;
  R_BC.col(0) = Vec3(0, -1, 0);
  R_BC.col(1) = Vec3(-std::sin(th), 0, -std::cos(th));
  R_BC.col(2) = Vec3(std::cos(th), 0, -std::sin(th));
  m.T_BC = Pose{R_BC, Vec3(0.30, 0.0, 0.05)};

  auto rod = [](double mass, double len) {
    const double i = mass * len * len / 12.0;
    return Mat3(Vec3(0.2 * i + 1e-4, i + 1e-4, i + 1e-4).asDiagonal());
  };
  auto link = [&](Vec3 t, Vec3 axis, double mass, Vec3 com, double len) {
    JointLink l;
    l.fixed = Pose{Mat3::Identity(), t};
    l.axis = axis;
    l.mass = mass;
    l.com = com;
    l.inertia = rod(mass, len);
    return l;
  };

  // 6-DOF arm: yaw shoulder, two pitch links, spherical-ish wrist.
  m.arm.links = {
      link({0, 0, 0.05}, Vec3::UnitZ(), 1.2, {0, 0, 0.03}, 0.06),
      link({0, 0, 0.05}, Vec3::UnitY(), 1.0, {0.12, 0, 0}, 0.25),
      link({0.25, 0, 0}, Vec3::UnitY(), 0.8, {0.10, 0, 0}, 0.20),
      link({0.20, 0, 0}, Vec3::UnitX(), 0.5, {0.05, 0, 0}, 0.10),
      link({0.10, 0, 0}, Vec3::UnitY(), 0.4, {0.03, 0, 0}, 0.05),
      link({0.05, 0, 0}, Vec3::UnitX(), 0.3, {0.02, 0, 0}, 0.04),
  };
  m.arm.tool = Pose{Mat3::Identity(), Vec3(0.06, 0, 0)};

  // Legs: FL, FR, RL, RR; 3 joints each (abduction x, hip y, knee y).
  const double hx = 0.25, hy = 0.15, l_abd = 0.08, l_thigh = 0.25, l_calf = 0.25;
  const std::array<Vec3, kNumLegs> hips = {Vec3(hx, hy, 0), Vec3(hx, -hy, 0), Vec3(-hx, hy, 0),
                                           Vec3(-hx, -hy, 0)};
  const std::array<double, kNumLegs> sides = {1.0, -1.0, 1.0, -1.0};
  for (int i = 0; i < kNumLegs; ++i) {
    m.legs[static_cast<size_t>(i)] = LegParams{hips[static_cast<size_t>(i)],
                                               sides[static_cast<size_t>(i)], l_abd, l_thigh,
                                               l_calf};
    SerialChain& c = m.leg_chains[static_cast<size_t>(i)];
    const double s = sides[static_cast<size_t>(i)];
    c.links = {
        link(hips[static_cast<size_t>(i)], Vec3::UnitX(), 0.6, {0, s * 0.04, 0}, 0.08),
        link({0, s * l_abd, 0}, Vec3::UnitY(), 0.8, {0, 0, -0.12}, l_thigh),
        link({0, 0, -l_thigh}, Vec3::UnitY(), 0.2, {0, 0, -0.12}, l_calf),
    };
    c.tool = Pose{Mat3::Identity(), Vec3(0, 0, -l_calf)};
  }
  return m;
}

}  // namespace qm
