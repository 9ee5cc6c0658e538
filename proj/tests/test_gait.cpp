#include <doctest.h>

#include "qmservo/gait.hpp"

using namespace qm;

TEST_CASE("trot schedule keeps diagonal pairs in antiphase") {
  const GaitSchedule g;
  for (double t = 0.0; t < 2.0; t += 0.001) {
    const auto c = g.contacts(t);
    CHECK(c[0] == c[3]);  // FL with RR
    CHECK(c[1] == c[2]);  // FR with RL
    CHECK(c[0] != c[1]);  // the two pairs alternate
  }
}

TEST_CASE("phase wraps and stance occupies the duty fraction") {
  const GaitSchedule g;
  CHECK(g.phase(0, 0.0) == doctest::Approx(0.0));
  CHECK(g.phase(0, g.period) == doctest::Approx(0.0));
  CHECK(g.phase(0, 1.25 * g.period) == doctest::Approx(0.25));
  CHECK(g.phase(1, 0.0) == doctest::Approx(0.5));

  int stance_samples = 0;
  const int n = 4000;
  for (int i = 0; i < n; ++i) {
    if (g.inStance(0, i * g.period / n)) ++stance_samples;
  }
  CHECK(std::abs(stance_samples / static_cast<double>(n) - g.duty) < 0.01);
}

TEST_CASE("durations and progress are consistent with the schedule") {
  const GaitSchedule g;
  CHECK(g.stanceDuration() == doctest::Approx(g.duty * g.period));
  CHECK(g.swingDuration() == doctest::Approx((1 - g.duty) * g.period));
  const double t_mid_stance = 0.25 * g.duty * g.period;
  CHECK(g.stanceProgress(0, t_mid_stance) == doctest::Approx(0.25));
  const double t_mid_swing = g.duty * g.period + 0.5 * (1 - g.duty) * g.period;
  CHECK(g.swingProgress(0, t_mid_swing) == doctest::Approx(0.5));
}

TEST_CASE("horizon contacts sample the schedule forward in time") {
  const GaitSchedule g;
  const auto h = g.horizonContacts(0.123, 10, 0.03);
  REQUIRE(h.size() == 10);
  for (int k = 0; k < 10; ++k) {
    CHECK(h[static_cast<size_t>(k)] == g.contacts(0.123 + k * 0.03));
  }
}

TEST_CASE("touchdown target follows the velocity heuristic") {
  const Vec3 hip(0.25, 0.15, 0);
  const Vec3 v(0.4, 0.1, 0);
  const Vec3 v_d(0.3, 0.0, 0);
  const double T_st = 0.2, k = 0.03, ground = -0.4;
  const Vec3 p = raibertFootstep(hip, v, v_d, T_st, k, ground);
  CHECK(p.x() == doctest::Approx(0.25 + 0.5 * T_st * 0.4 + k * 0.1).epsilon(1e-12));
  CHECK(p.y() == doctest::Approx(0.15 + 0.5 * T_st * 0.1 + k * 0.1).epsilon(1e-12));
  CHECK(p.z() == doctest::Approx(ground));
}
