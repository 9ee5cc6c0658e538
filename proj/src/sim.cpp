#include "qmservo/sim.hpp"

#include <cmath>
#include <stdexcept>

#include "qmservo/features.hpp"

namespace qm {

namespace {

// Arc length of a ramp-to-cap speed profile.
double rampDistance(double accel, double cap, double t) {
  if (accel <= 0.0 || cap <= 0.0) return 0.0;
  const double t_cap = cap / accel;
  if (t < t_cap) return 0.5 * accel * t * t;
  return 0.5 * accel * t_cap * t_cap + cap * (t - t_cap);
}

double rampSpeed(double accel, double cap, double t) {
  if (accel <= 0.0 || cap <= 0.0) return 0.0;
  return std::min(accel * t, cap);
}

}  // namespace

Vec3 TargetScript::position(double t) const {
  switch (kind) {
    case Kind::Static:
      return p0;
    case Kind::ConstantLine:
      return p0 + speed * t * direction.normalized();
    case Kind::AcceleratingLine:
      return p0 + rampDistance(accel, v_cap, t) * direction.normalized();
    case Kind::SCurve: {
      // Forward at constant speed, lateral velocity a full sine period whose
      // peak slope equals scurve_ay.
      const double w = scurve_ay / scurve_vy_cap;
      Vec3 p = p0;
      p.x() += scurve_vx * t;
      p.y() += scurve_vy_cap / w * (1.0 - std::cos(w * t));
      return p;
    }
  }
  return p0;
}

Vec3 TargetScript::velocity(double t) const {
  switch (kind) {
    case Kind::Static:
      return Vec3::Zero();
    case Kind::ConstantLine:
      return speed * direction.normalized();
    case Kind::AcceleratingLine:
      return rampSpeed(accel, v_cap, t) * direction.normalized();
    case Kind::SCurve: {
      const double w = scurve_ay / scurve_vy_cap;
      return Vec3(scurve_vx, scurve_vy_cap * std::sin(w * t), 0.0);
    }
  }
  return Vec3::Zero();
}

Plant::Plant(const KinematicModel& model, const PlantConfig& cfg, const TargetScript& target,
             const RobotState& initial)
    : model_(model), cfg_(cfg), target_(target), state_(initial), rng_(cfg.seed) {
  const Mat3 R_IB = eulerToRotation(state_.phi_B);
  for (int leg = 0; leg < kNumLegs; ++leg) {
    Vec3 p;
    Mat3 J;
    model_.legKinematics(leg, state_.legPosition(leg), p, J);
    pin_world_[static_cast<size_t>(leg)] = state_.p_B + R_IB * p;
    pinned_[static_cast<size_t>(leg)] = true;
  }
}

void Plant::step(const Actuation& act, double horizon) {
  const int n = std::max(1, static_cast<int>(std::lround(horizon / cfg_.dt)));
  const double dt = horizon / n;
  const double saved_dt = cfg_.dt;
  cfg_.dt = dt;
  for (int i = 0; i < n; ++i) {
    if (cfg_.tier == Tier::Kinematic) {
      substepKinematic(act);
    } else {
      substepDynamic(act);
    }
    t_ += dt;
  }
  cfg_.dt = saved_dt;
  checkFinite();
}

void Plant::substepKinematic(const Actuation& act) {
  const double dt = cfg_.dt;
  const double lag = std::max(cfg_.base_lag, dt);
  state_.v_B += (dt / lag) * (act.v_B_cmd - state_.v_B);
  state_.p_B += dt * state_.v_B;
  state_.setArmVelocity(act.qd_arm_cmd);
  state_.setArmPosition(state_.armPosition() + dt * act.qd_arm_cmd);
}

void Plant::substepDynamic(const Actuation& act) {
  const double dt = cfg_.dt;
  const Mat3 R_IB = eulerToRotation(state_.phi_B);
  const double m = model_.totalMass();

  // Ground reaction forces implied by the stance-leg torques.
  Vec3 F = Vec3(0, 0, -m * cfg_.gravity);
  Vec3 tau_net = Vec3::Zero();
  for (int leg = 0; leg < kNumLegs; ++leg) {
    const size_t li = static_cast<size_t>(leg);
    if (!act.stance[li]) continue;
    Vec3 p_foot;
    Mat3 J;
    model_.legKinematics(leg, state_.legPosition(leg), p_foot, J);
    Vec3 f_world;
    if (act.use_direct_grf) {
      f_world = act.grf_world[li];
    } else if (std::abs(J.determinant()) > 1e-8) {
      f_world = R_IB * J.transpose().partialPivLu().solve(act.leg_tau[li]);
    } else {
      f_world = Vec3::Zero();
    }
    F += f_world;
    tau_net += (R_IB * p_foot).cross(f_world);
  }

  // Base rigid body, semi-implicit Euler.
  state_.v_B += dt * F / m;
  state_.p_B += dt * state_.v_B;

  const Mat3 I_w = R_IB * model_.compositeInertia() * R_IB.transpose();
  const Vec3 omega_dot =
      I_w.partialPivLu().solve(tau_net - state_.omega_B.cross(I_w * state_.omega_B));
  state_.omega_B += dt * omega_dot;
  const Vec3 euler_rate =
      eulerRateToOmega(state_.phi_B).partialPivLu().solve(state_.omega_B);
  state_.phi_B.yaw += dt * euler_rate.x();
  state_.phi_B.pitch += dt * euler_rate.y();
  state_.phi_B.roll += dt * euler_rate.z();

  // Arm dynamics.
  const Vec6 q_arm = state_.armPosition();
  const Vec6 qd_arm = state_.armVelocity();
  Vec6 qdd;
  if (cfg_.arm_coupled) {
    const CoupledArmDynamics dyn = coupledArmDynamics(model_, state_, cfg_.gravity);
    qdd = dyn.M_fl.llt().solve(act.arm_tau - dyn.n_fl);
  } else {
    const Mat3 R_SB = model_.T_BS.R.transpose();
    const Vec3 g_S = R_SB * (R_IB.transpose() * Vec3(0, 0, -cfg_.gravity));
    const MatX M = model_.arm.massMatrix(q_arm);
    const VecX n = model_.arm.biasForces(q_arm, qd_arm, g_S);
    qdd = M.llt().solve(act.arm_tau - n);
  }
  state_.setArmVelocity(qd_arm + dt * qdd);
  state_.setArmPosition(q_arm + dt * state_.armVelocity());

  // Legs: stance feet stay pinned in the world, swing feet execute the
  // commanded plan kinematically.
  const Mat3 R_IB_new = eulerToRotation(state_.phi_B);
  for (int leg = 0; leg < kNumLegs; ++leg) {
    const size_t li = static_cast<size_t>(leg);
    Vec3 target_B;
    if (act.stance[li]) {
      if (!pinned_[li]) {
        Vec3 p;
        Mat3 J;
        model_.legKinematics(leg, state_.legPosition(leg), p, J);
        pin_world_[li] = state_.p_B + R_IB_new * p;
        pinned_[li] = true;
      }
      target_B = R_IB_new.transpose() * (pin_world_[li] - state_.p_B);
    } else {
      pinned_[li] = false;
      target_B = act.swing_foot_pos_B[li];
    }
    try {
      const Vec3 q_new = model_.legInverse(leg, target_B);
      state_.setLegVelocity(leg, (q_new - state_.legPosition(leg)) / dt);
      state_.setLegPosition(leg, q_new);
    } catch (const std::domain_error&) {
      state_.setLegVelocity(leg, Vec3::Zero());  // hold pose at workspace edge
    }
  }
}

void Plant::checkFinite() const {
  const bool ok = state_.p_B.allFinite() && state_.v_B.allFinite() &&
                  state_.omega_B.allFinite() && state_.q_j.allFinite() &&
                  state_.qd_j.allFinite() && std::isfinite(state_.phi_B.yaw) &&
                  std::isfinite(state_.phi_B.pitch) && std::isfinite(state_.phi_B.roll);
  if (!ok) throw std::runtime_error("Plant: state diverged to non-finite values");
}

Pose Plant::cameraPoseWorld() const {
  const Pose base{eulerToRotation(state_.phi_B), state_.p_B};
  return base * model_.T_BC;
}

std::array<Vec3, 4> Plant::markerCornersWorld() const {
  const Vec3 c = target_.position(t_);
  const double h = cfg_.marker_half_size;
  return {c + Vec3(h, h, 0), c + Vec3(h, -h, 0), c + Vec3(-h, -h, 0), c + Vec3(-h, h, 0)};
}

Measurement Plant::measure() {
  Measurement m;
  m.t = t_;
  m.state = state_;
  const Pose T_IC = cameraPoseWorld();
  int visible = 0;
  for (const Vec3& p_w : markerCornersWorld()) {
    const Vec3 Q = T_IC.R.transpose() * (p_w - T_IC.t);
    const bool vis = Q.z() > cfg_.min_depth;
    Vec2 q = vis ? Vec2(Q.x() / Q.z(), Q.y() / Q.z()) : Vec2::Zero();
    if (vis && cfg_.noise_amplitude > 0.0) {
      std::uniform_real_distribution<double> d(-cfg_.noise_amplitude, cfg_.noise_amplitude);
      q.x() += d(rng_);
      q.y() += d(rng_);
    }
    m.points.push_back(q);
    m.visible.push_back(vis ? 1 : 0);
    visible += vis ? 1 : 0;
  }
  tracking_lost_ = visible < 2;
  return m;
}

Vec3 Plant::graspPointWorld() const {
  return target_.position(t_) + Vec3(0, 0, cfg_.grasp_height);
}

Vec3 Plant::endEffectorWorld() const {
  const Pose base{eulerToRotation(state_.phi_B), state_.p_B};
  return (base * model_.T_BS * model_.armForward(state_.armPosition())).t;
}

std::vector<Vec3> Plant::targetPointsCamera() const {
  const Pose T_IC = cameraPoseWorld();
  std::vector<Vec3> out;
  for (const Vec3& p_w : markerCornersWorld()) {
    out.push_back(T_IC.R.transpose() * (p_w - T_IC.t));
  }
  return out;
}

Mat3 Plant::targetGainTruth() const {
  const Mat3 R_vc = virtualPlaneRotation(state_.phi_B, model_.T_BC.R);
  Mat3 L = Mat3::Zero();
  const auto pts = targetPointsCamera();
  for (const Vec3& Q : pts) {
    const Vec3 Qv = R_vc * Q;
    const Vec3 s = Qv.normalized();
    L += (Mat3::Identity() - s * s.transpose()) / Qv.norm();
  }
  return L / static_cast<double>(pts.size());
}

Vec3 Plant::targetVelocityCamera() const {
  return cameraPoseWorld().R.transpose() * target_.velocity(t_);
}

Vec3 Plant::cameraLinearVelocityCamera() const {
  const Mat3 R_IB = eulerToRotation(state_.phi_B);
  const Vec3 v_cam_world = state_.v_B + state_.omega_B.cross(R_IB * model_.T_BC.t);
  return cameraPoseWorld().R.transpose() * v_cam_world;
}

Vec3 Plant::cameraAngularVelocityCamera() const {
  return cameraPoseWorld().R.transpose() * state_.omega_B;
}

double Plant::armKineticEnergy() const {
  return model_.arm.kineticEnergy(state_.armPosition(), state_.armVelocity());
}

}  // namespace qm
