#include <doctest.h>

#include <cmath>

#include "qmservo/harness.hpp"
#include "qmservo/sim.hpp"

using namespace qm;

namespace {

TargetScript lineScript(double speed) {
  TargetScript t;
  t.kind = TargetScript::Kind::ConstantLine;
  t.p0 = Vec3(1.5, 0, 0);
  t.direction = Vec3(0, 1, 0);
  t.speed = speed;
  return t;
}

}  // namespace

TEST_CASE("target scripts: velocity is the time derivative of position") {
  std::vector<TargetScript> scripts;
  scripts.push_back(TargetScript{});  // static
  scripts.push_back(lineScript(0.3));
  {
    TargetScript t;
    t.kind = TargetScript::Kind::AcceleratingLine;
    t.p0 = Vec3(1.5, 0, 0);
    t.direction = Vec3(1, 1, 0);
    t.accel = 0.03;
    t.v_cap = 0.25;
    scripts.push_back(t);
  }
  {
    TargetScript t;
    t.kind = TargetScript::Kind::SCurve;
    t.p0 = Vec3(1.5, 0, 0);
    scripts.push_back(t);
  }

  const double h = 1e-6;
  for (const TargetScript& t : scripts) {
    for (double time = 0.5; time < 40.0; time += 3.7) {
      const Vec3 v_fd = (t.position(time + h) - t.position(time - h)) / (2 * h);
      CHECK((t.velocity(time) - v_fd).norm() < 1e-6);
    }
  }
}

TEST_CASE("accelerating line saturates at the velocity cap") {
  TargetScript t;
  t.kind = TargetScript::Kind::AcceleratingLine;
  t.direction = Vec3(1, 0, 0);
  t.accel = 0.03;
  t.v_cap = 0.25;
  CHECK(t.velocity(1.0).norm() == doctest::Approx(0.03));
  CHECK(t.velocity(100.0).norm() == doctest::Approx(0.25));
  // After the cap the trajectory keeps moving at constant speed.
  const Vec3 dp = t.position(101.0) - t.position(100.0);
  CHECK(dp.norm() == doctest::Approx(0.25).epsilon(1e-9));
}

TEST_CASE("measurements are deterministic for a fixed seed") {
  const KinematicModel model = KinematicModel::standard();
  PlantConfig cfg;
  cfg.noise_amplitude = 1e-3;
  cfg.seed = 42;
  const RobotState init = standingState(model);

  Plant a(model, cfg, lineScript(0.3), init);
  Plant b(model, cfg, lineScript(0.3), init);
  for (int i = 0; i < 5; ++i) {
    const Measurement ma = a.measure();
    const Measurement mb = b.measure();
    REQUIRE(ma.points.size() == mb.points.size());
    for (size_t j = 0; j < ma.points.size(); ++j) {
      CHECK((ma.points[j] - mb.points[j]).norm() == 0.0);
    }
  }

  PlantConfig cfg2 = cfg;
  cfg2.seed = 43;
  Plant c(model, cfg2, lineScript(0.3), init);
  const Measurement ma = a.measure();
  const Measurement mc = c.measure();
  bool any_diff = false;
  for (size_t j = 0; j < ma.points.size(); ++j) {
    if ((ma.points[j] - mc.points[j]).norm() > 0) any_diff = true;
  }
  CHECK(any_diff);
}

TEST_CASE("zero noise amplitude leaves measurements exact and seed independent") {
  const KinematicModel model = KinematicModel::standard();
  PlantConfig cfg;
  cfg.seed = 1;
  PlantConfig cfg2;
  cfg2.seed = 999;
  const RobotState init = standingState(model);
  Plant a(model, cfg, lineScript(0.0), init);
  Plant b(model, cfg2, lineScript(0.0), init);
  const Measurement ma = a.measure();
  const Measurement mb = b.measure();
  REQUIRE(ma.points.size() == mb.points.size());
  for (size_t j = 0; j < ma.points.size(); ++j) {
    CHECK((ma.points[j] - mb.points[j]).norm() == 0.0);
  }
}

TEST_CASE("kinematic tier integrates base velocity with a first-order lag") {
  const KinematicModel model = KinematicModel::standard();
  PlantConfig cfg;
  cfg.base_lag = 0.05;
  const RobotState init = standingState(model);
  Plant plant(model, cfg, TargetScript{}, init);

  Actuation act;
  act.v_B_cmd = Vec3(0.2, 0, 0);
  act.qd_arm_cmd = Vec6::Constant(0.1);
  plant.step(act, 0.5);

  // After 10 lag constants the base velocity has converged to the command.
  CHECK((plant.state().v_B - act.v_B_cmd).norm() < 1e-3);
  // Position integrates roughly v * (t - lag) once the lag has settled.
  CHECK(plant.state().p_B.x() ==
        doctest::Approx(0.2 * (0.5 - cfg.base_lag)).epsilon(0.02));
  // The arm integrates commanded rates directly.
  CHECK((plant.state().armPosition() - init.armPosition() - Vec6::Constant(0.05)).norm() < 1e-9);
}

TEST_CASE("grasp point sits the configured height above the marker center") {
  const KinematicModel model = KinematicModel::standard();
  PlantConfig cfg;
  cfg.grasp_height = 0.15;
  TargetScript t = lineScript(0.3);
  Plant plant(model, cfg, t, standingState(model));
  CHECK((plant.graspPointWorld() - (t.position(0.0) + Vec3(0, 0, 0.15))).norm() < 1e-12);
  plant.step(Actuation{}, 0.1);
  CHECK((plant.graspPointWorld() - (t.position(plant.time()) + Vec3(0, 0, 0.15))).norm() < 1e-12);
}

TEST_CASE("points behind the camera are reported invisible") {
  const KinematicModel model = KinematicModel::standard();
  PlantConfig cfg;
  TargetScript t;
  t.p0 = Vec3(-5.0, 0, 0);  // far behind the robot
  Plant plant(model, cfg, t, standingState(model));
  const Measurement m = plant.measure();
  int visible = 0;
  for (bool v : m.visible) visible += v ? 1 : 0;
  CHECK(visible < 2);
  CHECK(plant.trackingLost());
}

TEST_CASE("dynamic tier free fall matches closed-form ballistics") {
  // No stance legs and no forces: the base must accelerate at -g.
  const KinematicModel model = KinematicModel::standard();
  PlantConfig cfg;
  cfg.tier = Tier::Dynamic;
  cfg.arm_coupled = false;
  const RobotState init = standingState(model);
  Plant plant(model, cfg, TargetScript{}, init);

  Actuation act;  // all legs default to swing with zero torque
  for (int leg = 0; leg < kNumLegs; ++leg) {
    Vec3 p;
    Mat3 J;
    model.legKinematics(leg, init.legPosition(leg), p, J);
    act.swing_foot_pos_B[static_cast<size_t>(leg)] = p;
  }
  const double T = 0.1;
  plant.step(act, T);
  CHECK(plant.state().v_B.z() == doctest::Approx(-cfg.gravity * T).epsilon(0.02));
  CHECK(plant.state().p_B.z() ==
        doctest::Approx(init.p_B.z() - 0.5 * cfg.gravity * T * T).epsilon(0.05));
}

TEST_CASE("non-finite actuation aborts the run") {
  const KinematicModel model = KinematicModel::standard();
  PlantConfig cfg;
  Plant plant(model, cfg, TargetScript{}, standingState(model));
  Actuation act;
  act.v_B_cmd = Vec3(std::nan(""), 0, 0);
  CHECK_THROWS_AS(plant.step(act, 0.01), std::runtime_error);
}
