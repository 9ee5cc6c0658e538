#include "qmservo/gait.hpp"

#include <cmath>

namespace qm {

double GaitSchedule::phase(int leg, double t) const {
  const double ph = t / period + offsets[static_cast<size_t>(leg)];
  return ph - std::floor(ph);
}

std::array<bool, kNumLegs> GaitSchedule::contacts(double t) const {
  std::array<bool, kNumLegs> c{};
  for (int i = 0; i < kNumLegs; ++i) c[static_cast<size_t>(i)] = inStance(i, t);
  return c;
}

std::vector<std::array<bool, kNumLegs>> GaitSchedule::horizonContacts(double t, int steps,
                                                                      double dt) const {
  std::vector<std::array<bool, kNumLegs>> out;
  out.reserve(static_cast<size_t>(steps));
  for (int k = 0; k < steps; ++k) out.push_back(contacts(t + k * dt));
  return out;
}

Vec3 raibertFootstep(const Vec3& hip_pos_B, const Vec3& v_B_B, const Vec3& v_B_d_B,
                     double stance_time, double k_step, double ground_z_B) {
  Vec3 p = hip_pos_B + 0.5 * stance_time * v_B_B + k_step * (v_B_B - v_B_d_B);
  p.z() = ground_z_B;
  return p;
}

}  // namespace qm
