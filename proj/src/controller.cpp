#include "qmservo/controller.hpp"

#include <chrono>
#include <cmath>

namespace qm {

ServoController::ServoController(const KinematicModel& model, const ControllerConfig& cfg)
    : model_(model), cfg_(cfg) {
  cfg_.observer.validate();
  cfg_.servo.validate();
  cfg_.arm.validate();
  for (int leg = 0; leg < kNumLegs; ++leg) {
    Vec3 p;
    Mat3 J;
    model_.legKinematics(leg, Vec3::Zero(), p, J);
    liftoff_pos_B_[static_cast<size_t>(leg)] = p;
    stance_hold_B_[static_cast<size_t>(leg)] = p;
  }
}

StepStatus ServoController::step(const Measurement& meas, Actuation& act) {
  trace_ = ControlTrace{};
  trace_.t = meas.t;

  std::vector<FeaturePoint> pts;
  for (size_t i = 0; i < meas.points.size(); ++i) {
    if (i < meas.visible.size() && meas.visible[i]) pts.push_back(projectToSphere(meas.points[i]));
  }
  if (pts.size() < 2) return StepStatus::TrackingLost;

  const CentroidFeature target = targetCentroid(pts);
  const VirtualFeature vf = virtualCentroid(model_, meas.state, cfg_.vpoints);
  const Vec3 e = visualError(target.h, vf.centroid.h);

  const Mat3 R_IB = eulerToRotation(meas.state.phi_B);
  const Mat3 R_IC = R_IB * model_.T_BC.R;
  const Vec3 omega_c = R_IC.transpose() * meas.state.omega_B;
  const Vec3 v_cam_world = meas.state.v_B + meas.state.omega_B.cross(R_IB * model_.T_BC.t);
  const Vec3 v_c = R_IC.transpose() * v_cam_world;

  if (!observer_initialized_) {
    observer_ = stoInit(target.h);
    observer_initialized_ = true;
  } else {
    observer_ = stoStep(observer_, target.h, omega_c, v_c, vf.centroid.L, cfg_.observer,
                        cfg_.dt_control);
  }
  const Vec3 v_T_est = cfg_.use_sto ? stoEstimate(observer_) : Vec3::Zero();

  Vec3 v_B_d = baseReferenceVelocity(e, v_T_est, meas.state.omega_B, R_IC, R_IB,
                                     model_.T_BC.t, cfg_.servo);
  v_B_d += R_IC * depthAssist(target.h, vf);
  if (cfg_.planar_base) v_B_d.z() = 0.0;

  // Arm reference, gated on the target being inside the workspace cone.
  const double cone = cfg_.workspace_cone_deg * M_PI / 180.0;
  const bool in_cone =
      target.h.norm() > 1e-9 &&
      std::acos(std::clamp(target.h.normalized().z(), -1.0, 1.0)) < cone;
  Vec6 qd_arm_d = Vec6::Zero();
  if (in_cone) {
    const Mat6 J_e = model_.armJacobian(meas.state.armPosition());
    try {
      qd_arm_d = armReferenceRate(e, vf.centroid.L, vf.R_cam_to_virtual, vf.J_t, J_e,
                                  cfg_.servo.ka);
    } catch (const std::runtime_error&) {
      qd_arm_d = last_qd_arm_d_;  // freeze through the singular step
      trace_.arm_near_singular = true;
    }
    const double n = qd_arm_d.norm();
    if (n > cfg_.servo.qd_arm_max) qd_arm_d *= cfg_.servo.qd_arm_max / n;
  }
  last_qd_arm_d_ = qd_arm_d;

  if (!reference_) {
    reference_.emplace(meas.state.p_B, meas.state.phi_B.yaw, meas.state.armPosition());
  }
  reference_->step(v_B_d, qd_arm_d, cfg_.dt_control);

  trace_.h_o = target.h;
  trace_.h_t = vf.centroid.h;
  trace_.e = e;
  trace_.e_o = target.h - observer_.h_hat;
  trace_.v_T_est = v_T_est;
  trace_.v_B_d = v_B_d;
  trace_.qd_arm_d = qd_arm_d;
  trace_.arm_active = in_cone;

  act = Actuation{};
  if (cfg_.tier == Tier::Kinematic) {
    act.v_B_cmd = v_B_d;
    act.qd_arm_cmd = qd_arm_d;
  } else {
    if (step_count_ % cfg_.mpc_decimation == 0) runMpc(meas);
    legCommands(meas, act);
    const ArmTorqueResult arm = armTorque(model_, reference_->armPosition(),
                                          reference_->armRate(), reference_->armAcceleration(),
                                          meas.state, cfg_.arm, cfg_.gravity);
    act.arm_tau = arm.tau;
    trace_.arm_tau = arm.tau;
  }
  ++step_count_;
  return StepStatus::Ok;
}

Vec3 ServoController::depthAssist(const Vec3& h_o, const VirtualFeature& vf) const {
  if (cfg_.kb_depth <= 0.0) return Vec3::Zero();
  const double def_o = 1.0 - h_o.norm();
  const double def_t = 1.0 - vf.centroid.h.norm();
  if (def_o < 1e-8 || def_t < 1e-8 || h_o.norm() < 1e-9) return Vec3::Zero();
  double r_t = 0.0;
  for (const Vec3& Q : vf.Q_cam) r_t += Q.norm();
  r_t /= static_cast<double>(vf.Q_cam.size());
  // Both squares have the same physical size, so 1 - |h| ~ (size/range)^2 and
  // the range ratio falls out of the centroid magnitudes.
  const double r_o = r_t * std::sqrt(def_t / def_o);
  const double range_err = std::clamp(r_o - r_t, -1.0, 1.0);
  return cfg_.kb_depth * range_err * h_o.normalized();
}

void ServoController::runMpc(const Measurement& meas) {
  MpcProblem prob;
  prob.p_B = meas.state.p_B;
  prob.v_B = meas.state.v_B;
  prob.omega_B = meas.state.omega_B;
  prob.phi_B = meas.state.phi_B;
  const Mat3 R_IB = eulerToRotation(meas.state.phi_B);
  for (int leg = 0; leg < kNumLegs; ++leg) {
    Vec3 p;
    Mat3 J;
    model_.legKinematics(leg, meas.state.legPosition(leg), p, J);
    prob.foot_pos_world[static_cast<size_t>(leg)] = meas.state.p_B + R_IB * p;
  }
  prob.contacts = cfg_.gait.horizonContacts(meas.t, cfg_.mpc.horizon, cfg_.mpc.dt);
  prob.x_ref = reference_->horizon(cfg_.mpc.horizon, cfg_.mpc.dt);
  prob.model = SrbModel::fromKinematics(model_);
  prob.weights = cfg_.mpc;

  const auto t0 = std::chrono::steady_clock::now();
  MpcSolution sol = srbMpc(prob);
  trace_.mpc_solve_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  trace_.mpc_iterations = sol.iterations;
  trace_.mpc_kkt = sol.kkt_residual;
  trace_.mpc_solved = sol.ok;

  if (sol.ok) {
    last_mpc_ = sol;
    have_mpc_ = true;
  } else if (have_mpc_ && last_mpc_.forces.size() > 1) {
    // stale-solution fallback: shift the last feasible profile by one step
    last_mpc_.forces.erase(last_mpc_.forces.begin());
    trace_.mpc_stale = true;
  }
}

void ServoController::legCommands(const Measurement& meas, Actuation& act) {
  const Mat3 R_IB = eulerToRotation(meas.state.phi_B);
  const auto contacts = cfg_.gait.contacts(meas.t);
  const std::array<Vec3, kNumLegs> grf = have_mpc_ ? last_mpc_.first() : std::array<Vec3, kNumLegs>{};

  for (int leg = 0; leg < kNumLegs; ++leg) {
    const size_t li = static_cast<size_t>(leg);
    Vec3 p_foot;
    Mat3 J;
    model_.legKinematics(leg, meas.state.legPosition(leg), p_foot, J);

    LegCommand cmd;
    if (contacts[li]) {
      if (!was_stance_[li]) stance_hold_B_[li] = p_foot;  // touchdown
      cmd.mode = LegMode::Stance;
      cmd.foot_ref_B = p_foot;  // pinned foot: damp deviations only
      cmd.foot_vel_ref_B = -(R_IB.transpose() * trace_.v_B_d);
      cmd.grf_world = contacts[li] ? grf[li] : Vec3::Zero();
    } else {
      if (was_stance_[li]) liftoff_pos_B_[li] = p_foot;  // liftoff
      const double s = std::clamp(cfg_.gait.swingProgress(leg, meas.t), 0.0, 1.0);
      const double T_sw = cfg_.gait.swingDuration();
      const Vec3 hip = model_.legs[li].hip_offset;
      const Vec3 v_B_body = R_IB.transpose() * meas.state.v_B;
      const Vec3 v_d_body = R_IB.transpose() * trace_.v_B_d;
      const Vec3 target = raibertFootstep(hip, v_B_body, v_d_body, cfg_.gait.stanceDuration(),
                                          cfg_.leg.k_step, -meas.state.p_B.z());

      const double blend = 3 * s * s - 2 * s * s * s;
      const double dblend = (6 * s - 6 * s * s) / T_sw;
      const double ddblend = (6 - 12 * s) / (T_sw * T_sw);
      const Vec3 span = target - liftoff_pos_B_[li];
      cmd.mode = LegMode::Swing;
      cmd.foot_ref_B = liftoff_pos_B_[li] + blend * span;
      cmd.foot_ref_B.z() += cfg_.leg.swing_height * std::sin(M_PI * s);
      cmd.foot_vel_ref_B = dblend * span;
      cmd.foot_vel_ref_B.z() += cfg_.leg.swing_height * M_PI / T_sw * std::cos(M_PI * s);
      cmd.accel_ref_B = ddblend * span;
      cmd.accel_ref_B.z() -=
          cfg_.leg.swing_height * (M_PI / T_sw) * (M_PI / T_sw) * std::sin(M_PI * s);

      act.swing_foot_pos_B[li] = cmd.foot_ref_B;
      act.swing_foot_vel_B[li] = cmd.foot_vel_ref_B;
    }
    was_stance_[li] = contacts[li];
    act.stance[li] = contacts[li] ? 1 : 0;

    const LegTorqueResult res = legTorque(model_, leg, cmd, meas.state, cfg_.leg, cfg_.gravity);
    act.leg_tau[li] = res.tau;
    trace_.leg_tau[li] = res.tau;
    trace_.grf[li] = contacts[li] ? grf[li] : Vec3::Zero();
  }
}

}  // namespace qm
