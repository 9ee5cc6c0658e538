#pragma once

#include <array>
#include <vector>

#include "qmservo/kinematics.hpp"
#include "qmservo/servo.hpp"
#include "qmservo/types.hpp"

namespace qm {

// Lumped single-rigid-body model: total mass is base + arm, composite inertia
// is the base inertia plus the arm's nominal (home configuration) inertia.
struct SrbModel {
  double mass = 0.0;
  Mat3 inertia = Mat3::Zero();
  double gravity = 9.81;
  double mu = 0.5;
  double f_min = 0.0;
  double f_max = 0.0;

  static SrbModel fromKinematics(const KinematicModel& km);
  void validate() const;
};

struct MpcWeights {
  // Diagonal state cost over [roll,pitch,yaw, p(3), omega(3), v(3)].
  Vec12 q_diag = (Vec12() << 40, 40, 60, 80, 80, 120, 1, 1, 2, 8, 8, 12).finished();
  double r = 1e-10;  // force cost; kept tiny so equilibrium forces are exact
  int horizon = 10;
  double dt = 0.03;
};

struct MpcSolution {
  std::vector<std::array<Vec3, kNumLegs>> forces;  // world frame, per horizon step
  bool ok = false;
  int iterations = 0;
  double kkt_residual = 0.0;
  double constraint_residual = 0.0;
  double objective = 0.0;

  std::array<Vec3, kNumLegs> first() const { return forces.empty() ? std::array<Vec3, kNumLegs>{} : forces.front(); }
};

struct MpcProblem {
  Vec3 p_B;
  Vec3 v_B;
  Vec3 omega_B;
  EulerZYX phi_B;
  std::array<Vec3, kNumLegs> foot_pos_world;       // held constant over the horizon
  std::vector<std::array<bool, kNumLegs>> contacts;  // one entry per horizon step
  std::vector<BaseReferenceSample> x_ref;            // one entry per horizon step
  SrbModel model;
  MpcWeights weights;
};

// Condensed QP over the stance-force variables: minimize 0.5 u'Hu + g'u
// subject to A u <= b, with u0 a strictly feasible start. var_offset[k] is the
// first variable index of step k; stance_legs[k] lists its stance legs in
// variable order.
struct CondensedQp {
  MatX H;
  VecX g;
  MatX A;
  VecX b;
  VecX u0;
  std::vector<std::vector<int>> stance_legs;
  std::vector<int> var_offset;
};

CondensedQp condenseMpc(const MpcProblem& prob);

// Convex GRF MPC over the 13-state yaw-linearized SRB dynamics with friction
// pyramid and normal-force box constraints; ZOH discretization, condensed QP.
MpcSolution srbMpc(const MpcProblem& prob);

}  // namespace qm
