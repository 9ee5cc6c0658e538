#include "qmservo/chain.hpp"

#include "qmservo/kinematics.hpp"

namespace qm {

std::vector<Pose> SerialChain::framesOf(const VecX& q) const {
  std::vector<Pose> frames(links.size());
  Pose T;
  for (size_t i = 0; i < links.size(); ++i) {
    T = T * links[i].fixed;
    const Mat3 Rq = Eigen::AngleAxisd(q[static_cast<int>(i)], links[i].axis).toRotationMatrix();
    T.R = T.R * Rq;
    frames[i] = T;
  }
  return frames;
}

Pose SerialChain::forward(const VecX& q) const {
  const auto frames = framesOf(q);
  return frames.empty() ? tool : frames.back() * tool;
}

Mat6xX SerialChain::jacobian(const VecX& q) const {
  const auto frames = framesOf(q);
  const Vec3 p_e = frames.back() * tool.t;
  Mat6xX J(6, dof());
  for (int i = 0; i < dof(); ++i) {
    const Vec3 a = frames[i].R * links[i].axis;
    const Vec3 o = frames[i].t;
    J.block<3, 1>(0, i) = a.cross(p_e - o);
    J.block<3, 1>(3, i) = a;
  }
  return J;
}

namespace {

// Com Jacobian of link k (linear; angular), chain base frame.
Mat6xX comJacobian(const SerialChain& chain, const std::vector<Pose>& frames, int k) {
  const Vec3 c = frames[k] * chain.links[k].com;
  Mat6xX J = Mat6xX::Zero(6, chain.dof());
  for (int i = 0; i <= k; ++i) {
    const Vec3 a = frames[i].R * chain.links[i].axis;
    J.block<3, 1>(0, i) = a.cross(c - frames[i].t);
    J.block<3, 1>(3, i) = a;
  }
  return J;
}

}  // namespace

MatX SerialChain::massMatrix(const VecX& q) const {
  const auto frames = framesOf(q);
  MatX M = MatX::Zero(dof(), dof());
  for (int k = 0; k < dof(); ++k) {
    const Mat6xX Jk = comJacobian(*this, frames, k);
    const Mat3 Iw = frames[k].R * links[k].inertia * frames[k].R.transpose();
    M += links[k].mass * Jk.topRows<3>().transpose() * Jk.topRows<3>() +
         Jk.bottomRows<3>().transpose() * Iw * Jk.bottomRows<3>();
  }
  return M;
}

Mat6xX SerialChain::momentumJacobian(const VecX& q) const {
  const auto frames = framesOf(q);
  Mat6xX F = Mat6xX::Zero(6, dof());
  for (int k = 0; k < dof(); ++k) {
    const Mat6xX Jk = comJacobian(*this, frames, k);
    const Vec3 c = frames[k] * links[k].com;
    const Mat3 Iw = frames[k].R * links[k].inertia * frames[k].R.transpose();
    for (int j = 0; j <= k; ++j) {
      const Vec3 v_c = Jk.block<3, 1>(0, j);
      const Vec3 w = Jk.block<3, 1>(3, j);
      const Vec3 lin = links[k].mass * v_c;
      F.block<3, 1>(0, j) += lin;
      F.block<3, 1>(3, j) += Iw * w + c.cross(lin);
    }
  }
  return F;
}

VecX SerialChain::biasForces(const VecX& q, const VecX& qd, const Vec3& gravity,
                             const Vec3& base_omega, const Vec3& base_vel) const {
  const int n = dof();
  const auto frames = framesOf(q);

  std::vector<Vec3> omega(n), alpha(n), a_o(n), a_c(n), c_rel(n), f(n), nt(n);
  Vec3 w_prev = base_omega;
  Vec3 alpha_prev = Vec3::Zero();
  Vec3 a_prev = -gravity;  // fictitious root acceleration carries gravity
  Vec3 o_prev = Vec3::Zero();
  (void)base_vel;  // does not enter accelerations for a rigid root

  for (int i = 0; i < n; ++i) {
    const Vec3 a_axis = frames[i].R * links[i].axis;
    const Vec3 o_i = frames[i].t;
    const Vec3 d = o_i - o_prev;
    const Vec3 a_oi = a_prev + alpha_prev.cross(d) + w_prev.cross(w_prev.cross(d));
    omega[i] = w_prev + a_axis * qd[i];
    alpha[i] = alpha_prev + w_prev.cross(a_axis * qd[i]);
    c_rel[i] = frames[i].R * links[i].com;
    a_c[i] = a_oi + alpha[i].cross(c_rel[i]) + omega[i].cross(omega[i].cross(c_rel[i]));
    a_o[i] = a_oi;

    const Mat3 Iw = frames[i].R * links[i].inertia * frames[i].R.transpose();
    f[i] = links[i].mass * a_c[i];
    nt[i] = Iw * alpha[i] + omega[i].cross(Iw * omega[i]);

    w_prev = omega[i];
    alpha_prev = alpha[i];
    a_prev = a_oi;
    o_prev = o_i;
  }

  VecX tau(n);
  Vec3 F_sub = Vec3::Zero();  // subtree wrench, force part
  Vec3 N_sub = Vec3::Zero();  // subtree moment about o_{i+1}
  for (int i = n - 1; i >= 0; --i) {
    const Vec3 o_i = frames[i].t;
    Vec3 N_i = nt[i] + c_rel[i].cross(f[i]) + N_sub;
    if (i + 1 < n) N_i += (frames[i + 1].t - o_i).cross(F_sub);
    const Vec3 F_i = f[i] + F_sub;
    const Vec3 a_axis = frames[i].R * links[i].axis;
    tau[i] = a_axis.dot(N_i);
    N_sub = N_i;
    F_sub = F_i;
  }
  return tau;
}

Vec6 SerialChain::endEffectorBiasAcc(const VecX& q, const VecX& qd) const {
  const int n = dof();
  const auto frames = framesOf(q);

  Vec3 w_prev = Vec3::Zero(), alpha_prev = Vec3::Zero(), a_prev = Vec3::Zero();
  Vec3 o_prev = Vec3::Zero();
  for (int i = 0; i < n; ++i) {
    const Vec3 a_axis = frames[i].R * links[i].axis;
    const Vec3 o_i = frames[i].t;
    const Vec3 d = o_i - o_prev;
    const Vec3 a_oi = a_prev + alpha_prev.cross(d) + w_prev.cross(w_prev.cross(d));
    const Vec3 w_i = w_prev + a_axis * qd[i];
    const Vec3 al_i = alpha_prev + w_prev.cross(a_axis * qd[i]);
    w_prev = w_i;
    alpha_prev = al_i;
    a_prev = a_oi;
    o_prev = o_i;
  }
  const Vec3 r = frames.back().R * tool.t;
  Vec6 out;
  out.head<3>() = a_prev + alpha_prev.cross(r) + w_prev.cross(w_prev.cross(r));
  out.tail<3>() = alpha_prev;
  return out;
}

double SerialChain::kineticEnergy(const VecX& q, const VecX& qd) const {
  const auto frames = framesOf(q);
  double E = 0.0;
  Vec3 w_prev = Vec3::Zero();
  Vec3 v_prev = Vec3::Zero();
  Vec3 o_prev = Vec3::Zero();
  for (int i = 0; i < dof(); ++i) {
    const Vec3 a_axis = frames[i].R * links[i].axis;
    const Vec3 o_i = frames[i].t;
    const Vec3 v_oi = v_prev + w_prev.cross(o_i - o_prev);
    const Vec3 w_i = w_prev + a_axis * qd[i];
    const Vec3 c_rel = frames[i].R * links[i].com;
    const Vec3 v_c = v_oi + w_i.cross(c_rel);
    const Mat3 Iw = frames[i].R * links[i].inertia * frames[i].R.transpose();
    E += 0.5 * links[i].mass * v_c.squaredNorm() + 0.5 * w_i.dot(Iw * w_i);
    w_prev = w_i;
    v_prev = v_oi;
    o_prev = o_i;
  }
  return E;
}

}  // namespace qm
