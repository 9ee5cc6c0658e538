#include <doctest.h>

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

// Guards the information firewall between the controller and the plant: the
// controller must only ever see Measurement, never the simulator's ground
// truth. Enforced structurally by checking that no controller-side translation
// unit includes the simulator or harness headers.

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE_MESSAGE(in.good(), "cannot open " << path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::vector<std::string> kControllerFiles = {
    "include/qmservo/types.hpp",       "include/qmservo/chain.hpp",
    "include/qmservo/kinematics.hpp",  "include/qmservo/features.hpp",
    "include/qmservo/observer.hpp",    "include/qmservo/servo.hpp",
    "include/qmservo/qp.hpp",          "include/qmservo/gait.hpp",
    "include/qmservo/mpc.hpp",         "include/qmservo/leg_control.hpp",
    "include/qmservo/arm_control.hpp", "include/qmservo/controller.hpp",
    "src/chain.cpp",                   "src/kinematics.cpp",
    "src/features.cpp",                "src/observer.cpp",
    "src/servo.cpp",                   "src/qp.cpp",
    "src/gait.cpp",                    "src/mpc.cpp",
    "src/leg_control.cpp",             "src/arm_control.cpp",
    "src/controller.cpp",
};

}  // namespace

TEST_CASE("controller-side code never includes the simulator or harness") {
  const std::string root = std::string(TEST_SOURCE_DIR) + "/";
  for (const std::string& rel : kControllerFiles) {
    const std::string body = slurp(root + rel);
    INFO("file: " << rel);
    CHECK(body.find("sim.hpp") == std::string::npos);
    CHECK(body.find("harness.hpp") == std::string::npos);
  }
}

TEST_CASE("the simulator depends on the controller interface, not vice versa") {
  const std::string root = std::string(TEST_SOURCE_DIR) + "/";
  const std::string sim_hpp = slurp(root + "include/qmservo/sim.hpp");
  CHECK(sim_hpp.find("controller.hpp") != std::string::npos);
}
