#include "qmservo/harness.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace qm {

namespace {

using nlohmann::json;

void requireKeys(const json& obj, const std::string& where,
                 const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw std::runtime_error("config: " + where + " must be an object");
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key())) {
      throw std::runtime_error("config: unknown key '" + item.key() + "' in " + where);
    }
  }
}

template <int N>
Eigen::Matrix<double, N, 1> vecFromJson(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != N) {
    throw std::runtime_error("config: " + where + " must be an array of " + std::to_string(N));
  }
  Eigen::Matrix<double, N, 1> v;
  for (int i = 0; i < N; ++i) v[i] = j[static_cast<size_t>(i)].get<double>();
  return v;
}

void parseController(const json& j, ControllerConfig& c) {
  requireKeys(j, "controller",
              {"tier", "use_sto", "dt_control", "mpc_decimation", "workspace_cone_deg",
               "planar_base", "kb_depth", "gravity", "observer", "servo", "mpc", "gait",
               "leg", "arm"});
  if (j.contains("tier")) {
    const std::string t = j["tier"].get<std::string>();
    if (t == "kinematic") {
      c.tier = Tier::Kinematic;
    } else if (t == "dynamic") {
      c.tier = Tier::Dynamic;
    } else {
      throw std::runtime_error("config: controller.tier must be 'kinematic' or 'dynamic'");
    }
  }
  if (j.contains("use_sto")) c.use_sto = j["use_sto"].get<bool>();
  if (j.contains("dt_control")) c.dt_control = j["dt_control"].get<double>();
  if (j.contains("mpc_decimation")) c.mpc_decimation = j["mpc_decimation"].get<int>();
  if (j.contains("workspace_cone_deg")) c.workspace_cone_deg = j["workspace_cone_deg"].get<double>();
  if (j.contains("planar_base")) c.planar_base = j["planar_base"].get<bool>();
  if (j.contains("kb_depth")) c.kb_depth = j["kb_depth"].get<double>();
  if (j.contains("gravity")) c.gravity = j["gravity"].get<double>();
  if (c.dt_control <= 0 || c.mpc_decimation < 1) {
    throw std::runtime_error("config: dt_control must be > 0 and mpc_decimation >= 1");
  }

  if (j.contains("observer")) {
    const json& o = j["observer"];
    requireKeys(o, "controller.observer", {"k1", "k2", "k3", "k4", "p", "y_max"});
    if (o.contains("k1")) c.observer.k1 = o["k1"].get<double>();
    if (o.contains("k2")) c.observer.k2 = o["k2"].get<double>();
    if (o.contains("k3")) c.observer.k3 = o["k3"].get<double>();
    if (o.contains("k4")) c.observer.k4 = o["k4"].get<double>();
    if (o.contains("p")) c.observer.p = o["p"].get<double>();
    if (o.contains("y_max")) c.observer.y_max = o["y_max"].get<double>();
  }
  if (j.contains("servo")) {
    const json& s = j["servo"];
    requireKeys(s, "controller.servo", {"kb", "ka", "qd_arm_max"});
    if (s.contains("kb")) c.servo.kb = vecFromJson<3>(s["kb"], "controller.servo.kb");
    if (s.contains("ka")) c.servo.ka = vecFromJson<3>(s["ka"], "controller.servo.ka");
    if (s.contains("qd_arm_max")) c.servo.qd_arm_max = s["qd_arm_max"].get<double>();
  }
  if (j.contains("mpc")) {
    const json& m = j["mpc"];
    requireKeys(m, "controller.mpc", {"q_diag", "r", "horizon", "dt"});
    if (m.contains("q_diag")) c.mpc.q_diag = vecFromJson<12>(m["q_diag"], "controller.mpc.q_diag");
    if (m.contains("r")) c.mpc.r = m["r"].get<double>();
    if (m.contains("horizon")) c.mpc.horizon = m["horizon"].get<int>();
    if (m.contains("dt")) c.mpc.dt = m["dt"].get<double>();
    if (c.mpc.horizon < 1 || c.mpc.dt <= 0) {
      throw std::runtime_error("config: mpc.horizon must be >= 1 and mpc.dt > 0");
    }
  }
  if (j.contains("gait")) {
    const json& g = j["gait"];
    requireKeys(g, "controller.gait", {"period", "duty", "offsets"});
    if (g.contains("period")) c.gait.period = g["period"].get<double>();
    if (g.contains("duty")) c.gait.duty = g["duty"].get<double>();
    if (g.contains("offsets")) {
      const auto v = vecFromJson<4>(g["offsets"], "controller.gait.offsets");
      for (int i = 0; i < kNumLegs; ++i) c.gait.offsets[static_cast<size_t>(i)] = v[i];
    }
    if (c.gait.period <= 0 || c.gait.duty <= 0 || c.gait.duty >= 1) {
      throw std::runtime_error("config: gait.period must be > 0 and duty in (0, 1)");
    }
  }
  if (j.contains("leg")) {
    const json& l = j["leg"];
    requireKeys(l, "controller.leg", {"kp", "kd", "k_step", "swing_height"});
    if (l.contains("kp")) c.leg.kp = vecFromJson<3>(l["kp"], "controller.leg.kp");
    if (l.contains("kd")) c.leg.kd = vecFromJson<3>(l["kd"], "controller.leg.kd");
    if (l.contains("k_step")) c.leg.k_step = l["k_step"].get<double>();
    if (l.contains("swing_height")) c.leg.swing_height = l["swing_height"].get<double>();
  }
  if (j.contains("arm")) {
    const json& a = j["arm"];
    requireKeys(a, "controller.arm", {"kp", "kd", "tau_max"});
    if (a.contains("kp")) c.arm.kp = vecFromJson<6>(a["kp"], "controller.arm.kp");
    if (a.contains("kd")) c.arm.kd = vecFromJson<6>(a["kd"], "controller.arm.kd");
    if (a.contains("tau_max")) c.arm.tau_max = a["tau_max"].get<double>();
  }
  c.observer.validate();
  c.servo.validate();
  c.arm.validate();
}

void parsePlant(const json& j, PlantConfig& p) {
  requireKeys(j, "plant",
              {"dt", "base_lag", "gravity", "arm_coupled", "noise_amplitude", "seed",
               "grasp_height", "marker_half_size", "min_depth"});
  if (j.contains("dt")) p.dt = j["dt"].get<double>();
  if (j.contains("base_lag")) p.base_lag = j["base_lag"].get<double>();
  if (j.contains("gravity")) p.gravity = j["gravity"].get<double>();
  if (j.contains("arm_coupled")) p.arm_coupled = j["arm_coupled"].get<bool>();
  if (j.contains("noise_amplitude")) p.noise_amplitude = j["noise_amplitude"].get<double>();
  if (j.contains("seed")) p.seed = j["seed"].get<std::uint32_t>();
  if (j.contains("grasp_height")) p.grasp_height = j["grasp_height"].get<double>();
  if (j.contains("marker_half_size")) p.marker_half_size = j["marker_half_size"].get<double>();
  if (j.contains("min_depth")) p.min_depth = j["min_depth"].get<double>();
  if (p.dt <= 0 || p.noise_amplitude < 0 || p.marker_half_size <= 0) {
    throw std::runtime_error("config: plant.dt and marker_half_size must be > 0, "
                             "noise_amplitude >= 0");
  }
}

class CsvFile {
 public:
  CsvFile() = default;
  CsvFile(const std::string& path, const std::string& header) {
    f_ = std::fopen(path.c_str(), "w");
    if (!f_) throw std::runtime_error("cannot open " + path);
    std::fprintf(f_, "%s\n", header.c_str());
  }
  ~CsvFile() {
    if (f_) std::fclose(f_);
  }
  CsvFile(const CsvFile&) = delete;
  CsvFile& operator=(const CsvFile&) = delete;
  CsvFile(CsvFile&& other) noexcept : f_(other.f_) { other.f_ = nullptr; }
  CsvFile& operator=(CsvFile&& other) noexcept {
    if (this != &other) {
      if (f_) std::fclose(f_);
      f_ = other.f_;
      other.f_ = nullptr;
    }
    return *this;
  }

  void row(const std::vector<double>& vals) {
    if (!f_) return;
    for (size_t i = 0; i < vals.size(); ++i) {
      std::fprintf(f_, i + 1 == vals.size() ? "%.10g\n" : "%.10g,", vals[i]);
    }
  }
  explicit operator bool() const { return f_ != nullptr; }

 private:
  std::FILE* f_ = nullptr;
};

void append(std::vector<double>& row, const Vec3& v) {
  row.insert(row.end(), {v.x(), v.y(), v.z()});
}
void append(std::vector<double>& row, const Vec6& v) {
  for (int i = 0; i < 6; ++i) row.push_back(v[i]);
}

}  // namespace

// Standing start: base at a nominal height, feet under the abducted hips,
// elbow bent to stay clear of the straight-arm singularity.
RobotState standingState(const KinematicModel& model) {
  RobotState st;
  st.p_B = Vec3(0, 0, 0.40);
  for (int leg = 0; leg < kNumLegs; ++leg) {
    const LegParams& lp = model.legs[static_cast<size_t>(leg)];
    const Vec3 foot_B(lp.hip_offset.x(), lp.hip_offset.y() + lp.side_sign * lp.l_abd, -0.40);
    st.setLegPosition(leg, model.legInverse(leg, foot_B));
  }
  Vec6 q_arm;
  q_arm << 0.0, 0.5, -1.0, 0.0, 0.5, 0.0;
  st.setArmPosition(q_arm);
  return st;
}

HarnessConfig defaultConfig() { return HarnessConfig{}; }

HarnessConfig loadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("config: parse error: ") + e.what());
  }
  requireKeys(j, "top level", {"schema_version", "controller", "plant"});
  if (!j.contains("schema_version") || !j["schema_version"].is_number_integer() ||
      j["schema_version"].get<int>() != 1) {
    throw std::runtime_error("config: schema_version must be present and equal to 1");
  }
  HarnessConfig cfg;
  if (j.contains("controller")) parseController(j["controller"], cfg.controller);
  if (j.contains("plant")) parsePlant(j["plant"], cfg.plant);
  return cfg;
}

const std::vector<ScenarioSpec>& scenarioCatalog() {
  static const std::vector<ScenarioSpec> catalog = [] {
    std::vector<ScenarioSpec> v;
    const Vec3 start(1.5, 0, 0);

    ScenarioSpec s;
    s.name = "static";
    s.description = "stationary target, servo convergence check";
    s.target.kind = TargetScript::Kind::Static;
    s.target.p0 = start;
    s.duration = 20.0;
    v.push_back(s);

    auto line = [&](const std::string& name, double speed) {
      ScenarioSpec l;
      l.name = name;
      l.description = "straight-line target at " + std::to_string(speed) + " m/s";
      l.target.kind = TargetScript::Kind::ConstantLine;
      l.target.p0 = start;
      l.target.direction = Vec3::UnitX();
      l.target.speed = speed;
      l.duration = 30.0;
      return l;
    };
    v.push_back(line("line-0.3", 0.3));
    v.push_back(line("line-0.5", 0.5));

    auto ramp = [&](const std::string& name, double accel) {
      ScenarioSpec r;
      r.name = name;
      r.description = "target accelerating at " + std::to_string(accel) + " m/s^2, capped";
      r.target.kind = TargetScript::Kind::AcceleratingLine;
      r.target.p0 = start;
      r.target.direction = Vec3::UnitX();
      r.target.accel = accel;
      r.target.v_cap = 0.3;
      r.duration = 40.0;
      return r;
    };
    v.push_back(ramp("ramp-0.015", 0.015));
    v.push_back(ramp("ramp-0.03", 0.03));

    ScenarioSpec sc;
    sc.name = "s-curve";
    sc.description = "forward drift with sinusoidal lateral sweep";
    sc.target.kind = TargetScript::Kind::SCurve;
    sc.target.p0 = start;
    sc.duration = 40.0;
    v.push_back(sc);
    return v;
  }();
  return catalog;
}

const ScenarioSpec& findScenario(const std::string& name) {
  for (const auto& s : scenarioCatalog()) {
    if (s.name == name) return s;
  }
  throw std::runtime_error("unknown scenario '" + name + "'");
}

RunSummary runScenario(const ScenarioSpec& spec, const HarnessConfig& cfg,
                       const RunOptions& opt) {
  ScenarioSpec sc = spec;
  if (opt.speed_override) sc.target.speed = *opt.speed_override;
  if (opt.duration_override) sc.duration = *opt.duration_override;
  const Tier tier = opt.tier_override.value_or(sc.tier);

  const KinematicModel model = KinematicModel::standard();
  HarnessConfig c = cfg;
  c.controller.tier = tier;
  c.controller.use_sto = opt.use_sto;
  c.plant.tier = tier;
  c.plant.seed = opt.seed;
  c.plant.noise_amplitude = opt.noise_amplitude;

  Plant plant(model, c.plant, sc.target, standingState(model));
  ServoController ctrl(model, c.controller);

  CsvFile features, observer, references, forces, torques, errors;
  if (!opt.output_dir.empty()) {
    std::filesystem::create_directories(opt.output_dir);
    const std::string d = opt.output_dir + "/";
    features = CsvFile(d + "features.csv",
                       "t,h_o_x,h_o_y,h_o_z,h_t_x,h_t_y,h_t_z,e_x,e_y,e_z");
    observer = CsvFile(d + "observer.csv",
                       "t,e_o_x,e_o_y,e_o_z,v_est_x,v_est_y,v_est_z,"
                       "v_true_x,v_true_y,v_true_z");
    references = CsvFile(d + "references.csv",
                         "t,v_B_d_x,v_B_d_y,v_B_d_z,qd_arm_d_1,qd_arm_d_2,qd_arm_d_3,"
                         "qd_arm_d_4,qd_arm_d_5,qd_arm_d_6,arm_active,arm_near_singular");
    forces = CsvFile(d + "forces.csv",
                     "t,grf_fl_x,grf_fl_y,grf_fl_z,grf_fr_x,grf_fr_y,grf_fr_z,"
                     "grf_rl_x,grf_rl_y,grf_rl_z,grf_rr_x,grf_rr_y,grf_rr_z,"
                     "mpc_solved,mpc_stale,mpc_iterations,mpc_kkt,mpc_solve_ms");
    torques = CsvFile(d + "torques.csv",
                      "t,tau_fl_1,tau_fl_2,tau_fl_3,tau_fr_1,tau_fr_2,tau_fr_3,"
                      "tau_rl_1,tau_rl_2,tau_rl_3,tau_rr_1,tau_rr_2,tau_rr_3,"
                      "tau_arm_1,tau_arm_2,tau_arm_3,tau_arm_4,tau_arm_5,tau_arm_6");
    errors = CsvFile(d + "errors.csv",
                     "t,ee_error,ee_x,ee_y,ee_z,grasp_x,grasp_y,grasp_z,p_B_x,p_B_y,p_B_z");
  }

  RunSummary sum;
  sum.scenario = sc.name;
  sum.use_sto = opt.use_sto;
  sum.duration = sc.duration;

  const double dt = c.controller.dt_control;
  const long n_steps = static_cast<long>(std::lround(sc.duration / dt));
  double streak_start = -1.0;
  double tail_sum = 0.0, tail_max = 0.0;
  long tail_count = 0;
  const double tail_from = sc.duration - RunSummary::kSustainTime;

  for (long k = 0; k < n_steps; ++k) {
    Measurement meas = plant.measure();
    Actuation act;
    const StepStatus status = ctrl.step(meas, act);
    if (status == StepStatus::TrackingLost) {
      sum.tracking_lost = true;
      break;
    }
    try {
      plant.step(act, dt);
    } catch (const std::runtime_error&) {
      sum.diverged = true;
      break;
    }
    ++sum.steps;

    const double t = plant.time();
    const Vec3 ee = plant.endEffectorWorld();
    const Vec3 grasp = plant.graspPointWorld();
    const double err = (ee - grasp).norm();

    if (err < RunSummary::kErrorThreshold) {
      if (streak_start < 0) streak_start = t;
      if (!sum.converged && t - streak_start >= RunSummary::kSustainTime) {
        sum.converged = true;
        sum.convergence_time = streak_start;
      }
    } else {
      streak_start = -1.0;
    }
    sum.final_error = err;
    if (t >= tail_from) {
      tail_sum += err;
      tail_max = std::max(tail_max, err);
      ++tail_count;
    }
    sum.velocity_estimate_error =
        (ctrl.trace().v_T_est - plant.targetVelocityCamera()).norm();

    if (!opt.output_dir.empty() && k % opt.csv_decimation == 0) {
      const ControlTrace& tr = ctrl.trace();
      std::vector<double> row{tr.t};
      append(row, tr.h_o);
      append(row, tr.h_t);
      append(row, tr.e);
      features.row(row);

      row = {tr.t};
      append(row, tr.e_o);
      append(row, tr.v_T_est);
      append(row, plant.targetVelocityCamera());
      observer.row(row);

      row = {tr.t};
      append(row, tr.v_B_d);
      append(row, tr.qd_arm_d);
      row.push_back(tr.arm_active ? 1.0 : 0.0);
      row.push_back(tr.arm_near_singular ? 1.0 : 0.0);
      references.row(row);

      row = {tr.t};
      for (const auto& g : tr.grf) append(row, g);
      row.push_back(tr.mpc_solved ? 1.0 : 0.0);
      row.push_back(tr.mpc_stale ? 1.0 : 0.0);
      row.push_back(static_cast<double>(tr.mpc_iterations));
      row.push_back(tr.mpc_kkt);
      row.push_back(tr.mpc_solve_ms);
      forces.row(row);

      row = {tr.t};
      for (const auto& lt : tr.leg_tau) append(row, lt);
      append(row, tr.arm_tau);
      torques.row(row);

      row = {tr.t, err};
      append(row, ee);
      append(row, grasp);
      append(row, plant.state().p_B);
      errors.row(row);
    }
  }

  if (tail_count > 0) {
    sum.mean_tail_error = tail_sum / static_cast<double>(tail_count);
    sum.max_tail_error = tail_max;
  }
  if (!opt.output_dir.empty()) {
    writeSummaryJson(sum, opt.output_dir + "/summary.json");
  }
  return sum;
}

AblationReport compareScenario(const ScenarioSpec& spec, const HarnessConfig& cfg,
                               const RunOptions& opt) {
  AblationReport rep;
  RunOptions with = opt;
  with.use_sto = true;
  if (!opt.output_dir.empty()) with.output_dir = opt.output_dir + "/with-observer";
  rep.with_observer = runScenario(spec, cfg, with);

  RunOptions without = opt;
  without.use_sto = false;
  if (!opt.output_dir.empty()) without.output_dir = opt.output_dir + "/without-observer";
  rep.without_observer = runScenario(spec, cfg, without);
  return rep;
}

void writeSummaryJson(const RunSummary& s, const std::string& path) {
  json j;
  j["scenario"] = s.scenario;
  j["use_sto"] = s.use_sto;
  j["steps"] = s.steps;
  j["duration"] = s.duration;
  j["tracking_lost"] = s.tracking_lost;
  j["diverged"] = s.diverged;
  j["converged"] = s.converged;
  j["convergence_time"] = s.convergence_time;
  j["final_error"] = s.final_error;
  j["mean_tail_error"] = s.mean_tail_error;
  j["max_tail_error"] = s.max_tail_error;
  j["velocity_estimate_error"] = s.velocity_estimate_error;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << j.dump(2) << "\n";
}

}  // namespace qm
