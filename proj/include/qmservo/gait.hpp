#pragma once

#include <array>
#include <vector>

#include "qmservo/types.hpp"

namespace qm {

// Open-loop trot schedule: diagonal pairs in antiphase. A leg is in stance
// while its wrapped phase is below the duty factor.
struct GaitSchedule {
  double period = 0.4;
  double duty = 0.5;
  std::array<double, kNumLegs> offsets = {0.0, 0.5, 0.5, 0.0};  // FL FR RL RR

  double phase(int leg, double t) const;
  bool inStance(int leg, double t) const { return phase(leg, t) < duty; }
  std::array<bool, kNumLegs> contacts(double t) const;
  std::vector<std::array<bool, kNumLegs>> horizonContacts(double t, int steps, double dt) const;

  double stanceDuration() const { return duty * period; }
  double swingDuration() const { return (1.0 - duty) * period; }
  // Normalized progress in [0,1) through the current stance/swing interval.
  double stanceProgress(int leg, double t) const { return phase(leg, t) / duty; }
  double swingProgress(int leg, double t) const { return (phase(leg, t) - duty) / (1.0 - duty); }
};

// Raibert touchdown target in frame B:
//   p = p_hip + (t_stance/2) v_B + k_step (v_B - v_B_d), z at ground height.
Vec3 raibertFootstep(const Vec3& hip_pos_B, const Vec3& v_B_B, const Vec3& v_B_d_B,
                     double stance_time, double k_step, double ground_z_B);

}  // namespace qm
