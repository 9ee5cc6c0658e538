#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qmservo/harness.hpp"

namespace {

void printSummary(const qm::RunSummary& s) {
  std::printf("scenario:                %s\n", s.scenario.c_str());
  std::printf("observer feedforward:    %s\n", s.use_sto ? "on" : "off");
  std::printf("steps:                   %ld\n", s.steps);
  std::printf("tracking lost:           %s\n", s.tracking_lost ? "yes" : "no");
  std::printf("diverged:                %s\n", s.diverged ? "yes" : "no");
  std::printf("converged (<%.2f m, %.0f s): %s\n", qm::RunSummary::kErrorThreshold,
              qm::RunSummary::kSustainTime, s.converged ? "yes" : "no");
  if (s.converged) std::printf("convergence time:        %.3f s\n", s.convergence_time);
  std::printf("final tracking error:    %.4f m\n", s.final_error);
  std::printf("mean tail error (2 s):   %.4f m\n", s.mean_tail_error);
  std::printf("max tail error (2 s):    %.4f m\n", s.max_tail_error);
  std::printf("velocity estimate error: %.4f m/s\n", s.velocity_estimate_error);
}

struct CommonOpts {
  std::string config_path;
  std::string scenario = "static";
  std::string output_dir;
  std::uint32_t seed = 0;
  double noise = 0.0;
  bool no_observer = false;
  std::string tier;
  double duration = -1.0;
  double speed = -1.0;
};

void addCommon(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("scenario", o.scenario, "scenario name (see list-scenarios)");
  cmd->add_option("-c,--config", o.config_path, "JSON config file");
  cmd->add_option("-o,--out", o.output_dir, "directory for CSV traces and summary.json");
  cmd->add_option("--seed", o.seed, "measurement noise seed");
  cmd->add_option("--noise", o.noise, "uniform image noise amplitude");
  cmd->add_option("--tier", o.tier, "override simulation tier: kinematic | dynamic")
      ->check(CLI::IsMember({"kinematic", "dynamic"}));
  cmd->add_option("--duration", o.duration, "override run duration, seconds");
  cmd->add_option("--speed", o.speed, "override constant-line target speed, m/s");
}

qm::RunOptions toRunOptions(const CommonOpts& o) {
  qm::RunOptions opt;
  opt.output_dir = o.output_dir;
  opt.use_sto = !o.no_observer;
  opt.seed = o.seed;
  opt.noise_amplitude = o.noise;
  if (o.tier == "kinematic") opt.tier_override = qm::Tier::Kinematic;
  if (o.tier == "dynamic") opt.tier_override = qm::Tier::Dynamic;
  if (o.duration > 0) opt.duration_override = o.duration;
  if (o.speed >= 0) opt.speed_override = o.speed;
  return opt;
}

qm::HarnessConfig loadOrDefault(const std::string& path) {
  return path.empty() ? qm::defaultConfig() : qm::loadConfig(path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"visual-servoing scenario runner for a quadruped manipulator"};
  app.require_subcommand(1);

  CommonOpts run_opts;
  CLI::App* run = app.add_subcommand("run", "run one scenario closed loop");
  addCommon(run, run_opts);
  run->add_flag("--no-observer", run_opts.no_observer,
                "disable the target-velocity feedforward");

  CommonOpts cmp_opts;
  CLI::App* cmp = app.add_subcommand(
      "compare", "run a scenario with and without the velocity observer");
  addCommon(cmp, cmp_opts);

  CLI::App* list = app.add_subcommand("list-scenarios", "print the scenario catalog");

  CLI11_PARSE(app, argc, argv);

  try {
    if (list->parsed()) {
      for (const auto& s : qm::scenarioCatalog()) {
        std::printf("%-12s %s\n", s.name.c_str(), s.description.c_str());
      }
      return 0;
    }
    if (run->parsed()) {
      const qm::ScenarioSpec& spec = qm::findScenario(run_opts.scenario);
      const qm::RunSummary sum =
          qm::runScenario(spec, loadOrDefault(run_opts.config_path), toRunOptions(run_opts));
      printSummary(sum);
      return (sum.diverged || sum.tracking_lost) ? 2 : 0;
    }
    if (cmp->parsed()) {
      const qm::ScenarioSpec& spec = qm::findScenario(cmp_opts.scenario);
      const qm::AblationReport rep = qm::compareScenario(
          spec, loadOrDefault(cmp_opts.config_path), toRunOptions(cmp_opts));
      std::printf("=== with observer ===\n");
      printSummary(rep.with_observer);
      std::printf("\n=== without observer ===\n");
      printSummary(rep.without_observer);
      const bool any_bad = rep.with_observer.diverged || rep.with_observer.tracking_lost;
      return any_bad ? 2 : 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
