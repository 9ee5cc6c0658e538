#pragma once

#include "qmservo/types.hpp"

namespace qm {

// Gains of the multivariable super-twisting observer. Defaults are the
// canonical simulation values.
struct ObserverGains {
  double k1 = 10.0;
  double k2 = 100.0;
  double k3 = 0.05;
  double k4 = 0.05;
  double p = 0.4;       // exponent in (0, 0.5]
  double y_max = 2.0;   // anti-windup clamp on |y|, m/s

  void validate() const;
};

// Internal state: h_hat estimates the target centroid h_o, y estimates the
// target linear velocity in the camera frame.
struct ObserverState {
  Vec3 h_hat = Vec3::Zero();
  Vec3 y = Vec3::Zero();
  bool rejected_last = false;  // last measurement was non-finite and ignored
};

ObserverState stoInit(const Vec3& h_o_first);

// One explicit-Euler step of
//   h_hat_dot = -[Omega_c]x h_o - L_t v_c + k1 phi1(e_o) e_o + L_t y
//   y_dot     = k2 phi2(e_o) e_o
//   phi1 = k3 |e_o|^-p + k4,  phi2 = (k3 (1-p) |e_o|^-p + k4) phi1
// with the correction products defined as exactly zero at e_o = 0. The
// transport term feeds back the measured h_o as printed; the h_hat variant is
// deliberately not used. Non-finite measurements leave the state unchanged
// and set rejected_last.
ObserverState stoStep(const ObserverState& state, const Vec3& h_o, const Vec3& omega_c,
                      const Vec3& v_c, const Mat3& L_t, const ObserverGains& gains, double dt);

inline Vec3 stoEstimate(const ObserverState& state) { return state.y; }

}  // namespace qm
