#include "qmservo/observer.hpp"

#include <cmath>
#include <stdexcept>

#include "qmservo/kinematics.hpp"

namespace qm {

void ObserverGains::validate() const {
  if (k1 <= 0 || k2 <= 0 || k3 <= 0 || k4 <= 0) {
    throw std::invalid_argument("ObserverGains: gains must be positive");
  }
  if (p <= 0 || p > 0.5) {
    throw std::invalid_argument("ObserverGains: p must be in (0, 0.5]");
  }
}

ObserverState stoInit(const Vec3& h_o_first) {
  ObserverState s;
  s.h_hat = h_o_first;
  s.y.setZero();
  return s;
}

ObserverState stoStep(const ObserverState& state, const Vec3& h_o, const Vec3& omega_c,
                      const Vec3& v_c, const Mat3& L_t, const ObserverGains& gains, double dt) {
  if (!(dt > 0 && dt <= 0.01)) throw std::invalid_argument("stoStep: dt out of (0, 0.01]");
  if (!h_o.allFinite() || !omega_c.allFinite() || !v_c.allFinite()) {
    ObserverState s = state;
    s.rejected_last = true;
    return s;
  }

  const Vec3 e_o = h_o - state.h_hat;
  const double norm = e_o.norm();

  Vec3 corr1 = Vec3::Zero();  // phi1(e_o) e_o
  Vec3 corr2 = Vec3::Zero();  // phi2(e_o) e_o
  if (norm > 0) {
    const double npow = std::pow(norm, -gains.p);
    const double phi1 = gains.k3 * npow + gains.k4;
    const double phi2 = (gains.k3 * (1.0 - gains.p) * npow + gains.k4) * phi1;
    corr1 = phi1 * e_o;
    corr2 = phi2 * e_o;
  }

  ObserverState next;
  next.h_hat = state.h_hat +
               dt * (-skew(omega_c) * h_o - L_t * v_c + gains.k1 * corr1 + L_t * state.y);
  next.y = state.y + dt * gains.k2 * corr2;
  const double yn = next.y.norm();
  if (yn > gains.y_max) next.y *= gains.y_max / yn;
  next.rejected_last = false;
  return next;
}

}  // namespace qm
