#include "qmservo/mpc.hpp"

#include <stdexcept>
#include <unsupported/Eigen/MatrixFunctions>

#include "qmservo/qp.hpp"

namespace qm {

SrbModel SrbModel::fromKinematics(const KinematicModel& km) {
  SrbModel m;
  m.mass = km.totalMass();
  m.inertia = km.compositeInertia();
  m.f_max = 2.0 * m.mass * m.gravity;
  return m;
}

void SrbModel::validate() const {
  if (mass <= 0) throw std::invalid_argument("SrbModel: mass must be positive");
  const Eigen::LLT<Mat3> llt(inertia);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("SrbModel: inertia must be SPD");
}

namespace {
constexpr int kNx = 13;  // [rpy(3), p(3), omega(3), v(3), gravity]

Eigen::Matrix<double, kNx, 1> packState(const MpcProblem& p) {
  Eigen::Matrix<double, kNx, 1> x;
  x << p.phi_B.roll, p.phi_B.pitch, p.phi_B.yaw, p.p_B, p.omega_B, p.v_B, 1.0;
  return x;
}

Eigen::Matrix<double, kNx, 1> packRef(const BaseReferenceSample& r) {
  Eigen::Matrix<double, kNx, 1> x;
  x << r.phi_d.roll, r.phi_d.pitch, r.phi_d.yaw, r.p_d, r.omega_d, r.v_d, 1.0;
  return x;
}

}  // namespace

CondensedQp condenseMpc(const MpcProblem& prob) {
  prob.model.validate();
  const int N = static_cast<int>(prob.contacts.size());
  if (N <= 0 || prob.x_ref.size() != static_cast<size_t>(N)) {
    throw std::invalid_argument("srbMpc: contacts/x_ref must cover the horizon");
  }

  CondensedQp qp;

  // Variable layout: stance-foot forces only, step-major.
  std::vector<std::vector<int>>& stance_legs = qp.stance_legs;
  std::vector<int>& var_offset = qp.var_offset;
  stance_legs.resize(static_cast<size_t>(N));
  var_offset.resize(static_cast<size_t>(N));
  int n_vars = 0;
  for (int k = 0; k < N; ++k) {
    var_offset[static_cast<size_t>(k)] = n_vars;
    for (int leg = 0; leg < kNumLegs; ++leg) {
      if (prob.contacts[static_cast<size_t>(k)][static_cast<size_t>(leg)]) {
        stance_legs[static_cast<size_t>(k)].push_back(leg);
        n_vars += 3;
      }
    }
  }
  if (n_vars == 0) {
    qp.H = MatX::Zero(0, 0);
    qp.g = VecX::Zero(0);
    qp.A = MatX::Zero(0, 0);
    qp.b = VecX::Zero(0);
    qp.u0 = VecX::Zero(0);
    return qp;
  }

  const double m = prob.model.mass;
  const double g = prob.model.gravity;
  const Mat3 Rz = Eigen::AngleAxisd(prob.phi_B.yaw, Vec3::UnitZ()).toRotationMatrix();
  const Mat3 I_w = Rz * prob.model.inertia * Rz.transpose();
  const Mat3 I_w_inv = I_w.inverse();

  MatX A_c = MatX::Zero(kNx, kNx);
  A_c.block<3, 3>(0, 6) = Rz.transpose();
  A_c.block<3, 3>(3, 9) = Mat3::Identity();
  A_c(11, 12) = -g;

  // Per-step discretization (ZOH) grouped by contact pattern.
  const double dt = prob.weights.dt;
  MatX Ad;
  std::vector<MatX> Bd(static_cast<size_t>(N));
  {
    // Ad from the widest exponential; Bd per distinct stance set.
    for (int k = 0; k < N; ++k) {
      const int nu = 3 * static_cast<int>(stance_legs[static_cast<size_t>(k)].size());
      MatX B_c = MatX::Zero(kNx, nu);
      for (size_t j = 0; j < stance_legs[static_cast<size_t>(k)].size(); ++j) {
        const int leg = stance_legs[static_cast<size_t>(k)][j];
        const Vec3 r = prob.foot_pos_world[static_cast<size_t>(leg)] - prob.p_B;
        B_c.block<3, 3>(6, 3 * static_cast<int>(j)) = I_w_inv * skew(r);
        B_c.block<3, 3>(9, 3 * static_cast<int>(j)) = Mat3::Identity() / m;
      }
      MatX M = MatX::Zero(kNx + nu, kNx + nu);
      M.topLeftCorner(kNx, kNx) = A_c;
      M.topRightCorner(kNx, nu) = B_c;
      const MatX E = (M * dt).exp();
      if (k == 0) Ad = E.topLeftCorner(kNx, kNx);
      Bd[static_cast<size_t>(k)] = E.topRightCorner(kNx, nu);
    }
    if (!(Ad.rows() == kNx)) throw std::logic_error("srbMpc: discretization failed");
  }

  // Condensed prediction: x_{k+1} = Ad^{k+1} x0 + sum_j Ad^{k-j} Bd_j u_j.
  std::vector<MatX> Ad_pow(static_cast<size_t>(N) + 1);
  Ad_pow[0] = MatX::Identity(kNx, kNx);
  for (int k = 1; k <= N; ++k) Ad_pow[static_cast<size_t>(k)] = Ad * Ad_pow[static_cast<size_t>(k - 1)];

  MatX Bbar = MatX::Zero(kNx * N, n_vars);
  VecX x_free(kNx * N);
  const Eigen::Matrix<double, kNx, 1> x0 = packState(prob);
  for (int k = 0; k < N; ++k) {
    x_free.segment(kNx * k, kNx) = Ad_pow[static_cast<size_t>(k) + 1] * x0;
    for (int j = 0; j <= k; ++j) {
      const int nu = static_cast<int>(Bd[static_cast<size_t>(j)].cols());
      if (nu == 0) continue;
      Bbar.block(kNx * k, var_offset[static_cast<size_t>(j)], kNx, nu) =
          Ad_pow[static_cast<size_t>(k - j)] * Bd[static_cast<size_t>(j)];
    }
  }

  VecX q_full = VecX::Zero(kNx);
  q_full.head<12>() = prob.weights.q_diag;
  VecX Qbar_diag(kNx * N);
  VecX x_ref(kNx * N);
  for (int k = 0; k < N; ++k) {
    Qbar_diag.segment(kNx * k, kNx) = q_full;
    x_ref.segment(kNx * k, kNx) = packRef(prob.x_ref[static_cast<size_t>(k)]);
  }

  const MatX BtQ = Bbar.transpose() * Qbar_diag.asDiagonal();
  qp.H = BtQ * Bbar;
  qp.H.diagonal().array() += prob.weights.r;
  qp.H = 0.5 * (qp.H + qp.H.transpose().eval());
  qp.g = BtQ * (x_free - x_ref);

  // Friction pyramid + normal force box, 6 rows per stance foot per step.
  int n_con = 0;
  for (int k = 0; k < N; ++k) n_con += 6 * static_cast<int>(stance_legs[static_cast<size_t>(k)].size());
  qp.A = MatX::Zero(n_con, n_vars);
  qp.b.resize(n_con);
  qp.u0 = VecX::Zero(n_vars);
  {
    int row = 0;
    const double mu = prob.model.mu;
    for (int k = 0; k < N; ++k) {
      const int ns = static_cast<int>(stance_legs[static_cast<size_t>(k)].size());
      for (int j = 0; j < ns; ++j) {
        const int c = var_offset[static_cast<size_t>(k)] + 3 * j;
        qp.A(row, c + 2) = 1.0;  qp.b(row++) = prob.model.f_max;
        qp.A(row, c + 2) = -1.0; qp.b(row++) = -prob.model.f_min;
        qp.A(row, c) = 1.0;  qp.A(row, c + 2) = -mu; qp.b(row++) = 0.0;
        qp.A(row, c) = -1.0; qp.A(row, c + 2) = -mu; qp.b(row++) = 0.0;
        qp.A(row, c + 1) = 1.0;  qp.A(row, c + 2) = -mu; qp.b(row++) = 0.0;
        qp.A(row, c + 1) = -1.0; qp.A(row, c + 2) = -mu; qp.b(row++) = 0.0;
        // strictly interior start: share the weight among stance feet
        qp.u0[c + 2] = std::min(m * g / ns, 0.5 * (prob.model.f_min + prob.model.f_max));
      }
    }
  }
  return qp;
}

MpcSolution srbMpc(const MpcProblem& prob) {
  const CondensedQp cq = condenseMpc(prob);
  const int N = static_cast<int>(prob.contacts.size());

  MpcSolution sol;
  sol.forces.assign(static_cast<size_t>(N), {Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero()});
  if (cq.H.rows() == 0) {
    sol.ok = true;  // all swing: zero forces, trivially feasible
    return sol;
  }

  const QpResult qp = solveQp(cq.H, cq.g, cq.A, cq.b, cq.u0);
  sol.iterations = qp.iterations;
  sol.kkt_residual = std::max(qp.stationarity, qp.complementarity);
  sol.constraint_residual = qp.primal_residual;
  sol.objective = qp.objective;
  sol.ok = qp.converged && sol.kkt_residual <= 1e-6 && sol.constraint_residual <= 1e-8;

  for (int k = 0; k < N; ++k) {
    for (size_t j = 0; j < cq.stance_legs[static_cast<size_t>(k)].size(); ++j) {
      const int leg = cq.stance_legs[static_cast<size_t>(k)][j];
      sol.forces[static_cast<size_t>(k)][static_cast<size_t>(leg)] =
          qp.x.segment<3>(cq.var_offset[static_cast<size_t>(k)] + 3 * static_cast<int>(j));
    }
  }
  return sol;
}

}  // namespace qm
