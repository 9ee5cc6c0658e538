#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qmservo/controller.hpp"
#include "qmservo/sim.hpp"

namespace qm {

// Controller + plant configuration as loaded from a JSON config file.
struct HarnessConfig {
  ControllerConfig controller;
  PlantConfig plant;
};

// Parses a config file. Unknown keys anywhere in the document are rejected
// with std::runtime_error, as are out-of-range values and a missing or
// unsupported schema_version.
HarnessConfig loadConfig(const std::string& path);
HarnessConfig defaultConfig();

// A named closed-loop experiment: target motion plus run length.
struct ScenarioSpec {
  std::string name;
  std::string description;
  TargetScript target;
  Tier tier = Tier::Kinematic;
  double duration = 30.0;
};

const std::vector<ScenarioSpec>& scenarioCatalog();
const ScenarioSpec& findScenario(const std::string& name);

// Nominal standing start used by every scenario: base at 0.40 m, feet under
// the abducted hips, arm elbow bent away from the straight-arm singularity.
RobotState standingState(const KinematicModel& model);

struct RunOptions {
  std::string output_dir;  // empty: no CSV output
  bool use_sto = true;
  std::uint32_t seed = 0;
  double noise_amplitude = 0.0;
  std::optional<Tier> tier_override;
  std::optional<double> duration_override;
  std::optional<double> speed_override;  // scales/overrides the target speed
  int csv_decimation = 4;                // trace every Nth control step
};

struct RunSummary {
  std::string scenario;
  bool use_sto = true;
  long steps = 0;
  double duration = 0.0;
  bool tracking_lost = false;
  bool diverged = false;

  bool converged = false;        // error below threshold, sustained
  double convergence_time = -1;  // start of the first sustained window, s
  double final_error = 0.0;      // |EE - grasp point| at the end, m
  double mean_tail_error = 0.0;  // mean error over the last 2 s, m
  double max_tail_error = 0.0;
  double velocity_estimate_error = 0.0;  // |v_hat - v_T|, camera frame, end

  static constexpr double kErrorThreshold = 0.05;  // m
  static constexpr double kSustainTime = 2.0;      // s
};

RunSummary runScenario(const ScenarioSpec& spec, const HarnessConfig& cfg,
                       const RunOptions& opt);

// Same scenario with and without the velocity observer feedforward.
struct AblationReport {
  RunSummary with_observer;
  RunSummary without_observer;
};
AblationReport compareScenario(const ScenarioSpec& spec, const HarnessConfig& cfg,
                               const RunOptions& opt);

void writeSummaryJson(const RunSummary& s, const std::string& path);

}  // namespace qm
