#include "assembler/io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "assembler/error.hpp"

namespace assembler {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ParseError(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ParseError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

Vec3 vec3_from(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) throw ParseError(where + " must be an array of 3 numbers");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

json to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vector_from(const json& j, const std::string& where) {
  if (!j.is_array()) throw ParseError(where + " must be an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

json to_json(const Transform& t) {
  const TaaPose p = taa_from_transform(t);
  return {{"translation", to_json(p.translation)}, {"rotation_axis_angle", to_json(p.rotation)}};
}

TaaPose taa_from(const json& j, const std::string& where) {
  check_keys(j, {"translation", "rotation_axis_angle"}, where);
  TaaPose p;
  if (j.contains("translation")) p.translation = vec3_from(j.at("translation"), where + ".translation");
  if (j.contains("rotation_axis_angle")) {
    p.rotation = vec3_from(j.at("rotation_axis_angle"), where + ".rotation_axis_angle");
  }
  if (!p.translation.allFinite() || !p.rotation.allFinite()) throw ParseError(where + " has non-finite values");
  return p;
}

json to_json(const ForceMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(row);
  }
  return rows;
}

json to_json(const MassModel& m) {
  return {{"plate_mass", m.plate_mass},     {"motor_mass", m.motor_mass},
          {"shaft_mass", m.shaft_mass},     {"payload_mass", m.payload_mass},
          {"payload_offset", m.payload_offset}, {"gravity", to_json(m.gravity)}};
}

void apply(const json& j, MassModel& m, const std::string& where) {
  check_keys(j, {"plate_mass", "motor_mass", "shaft_mass", "payload_mass", "payload_offset", "gravity"}, where);
  read_if(j, "plate_mass", m.plate_mass);
  read_if(j, "motor_mass", m.motor_mass);
  read_if(j, "shaft_mass", m.shaft_mass);
  read_if(j, "payload_mass", m.payload_mass);
  read_if(j, "payload_offset", m.payload_offset);
  if (j.contains("gravity")) m.gravity = vec3_from(j.at("gravity"), where + ".gravity");
}

json to_json(const OptimizerConfig& c) {
  json tol = json::array();
  for (int i = 0; i < 6; ++i) tol.push_back(c.pose_tolerances[i]);
  return {{"w1", c.w1},
          {"w2", c.w2},
          {"pose_tolerances", tol},
          {"f_tension_max", c.f_tension_max},
          {"f_compression_max", c.f_compression_max},
          {"max_iterations", c.max_iterations},
          {"constraint_tolerance", c.constraint_tolerance},
          {"convergence_tolerance", c.convergence_tolerance},
          {"gradient_step", c.gradient_step},
          {"initial_trust_radius", c.initial_trust_radius},
          {"smooth_max", c.smooth_max},
          {"softmax_beta", c.softmax_beta}};
}

void apply(const json& j, OptimizerConfig& c, const std::string& where) {
  check_keys(j,
             {"w1", "w2", "pose_tolerances", "f_tension_max", "f_compression_max", "max_iterations",
              "constraint_tolerance", "convergence_tolerance", "gradient_step", "initial_trust_radius", "smooth_max",
              "softmax_beta"},
             where);
  read_if(j, "w1", c.w1);
  read_if(j, "w2", c.w2);
  if (j.contains("pose_tolerances")) {
    const Eigen::VectorXd t = vector_from(j.at("pose_tolerances"), where + ".pose_tolerances");
    if (t.size() != 6) throw ParseError(where + ".pose_tolerances needs 6 entries");
    c.pose_tolerances = t;
  }
  read_if(j, "f_tension_max", c.f_tension_max);
  read_if(j, "f_compression_max", c.f_compression_max);
  read_if(j, "max_iterations", c.max_iterations);
  read_if(j, "constraint_tolerance", c.constraint_tolerance);
  read_if(j, "convergence_tolerance", c.convergence_tolerance);
  read_if(j, "gradient_step", c.gradient_step);
  read_if(j, "initial_trust_radius", c.initial_trust_radius);
  read_if(j, "smooth_max", c.smooth_max);
  read_if(j, "softmax_beta", c.softmax_beta);
}

json to_json(const InitializerParams& p) {
  json j = {{"d_step", p.d_step},
            {"recursion_limit", p.recursion_limit},
            {"ik_tolerance_translation", p.ik_tolerance_translation},
            {"ik_tolerance_rotation", p.ik_tolerance_rotation},
            {"joint_limit_margin", p.joint_limit_margin},
            {"damping", p.ik.damping},
            {"max_step", p.ik.max_step},
            {"max_iterations", p.ik.max_iterations}};
  j["helper_joint_limit"] = p.helper_joint_limit ? json(*p.helper_joint_limit) : json(nullptr);
  return j;
}

void apply(const json& j, InitializerParams& p, const std::string& where) {
  check_keys(j,
             {"d_step", "recursion_limit", "ik_tolerance_translation", "ik_tolerance_rotation", "joint_limit_margin",
              "helper_joint_limit", "damping", "max_step", "max_iterations"},
             where);
  read_if(j, "d_step", p.d_step);
  read_if(j, "recursion_limit", p.recursion_limit);
  read_if(j, "ik_tolerance_translation", p.ik_tolerance_translation);
  read_if(j, "ik_tolerance_rotation", p.ik_tolerance_rotation);
  read_if(j, "joint_limit_margin", p.joint_limit_margin);
  if (j.contains("helper_joint_limit")) {
    const json& v = j.at("helper_joint_limit");
    p.helper_joint_limit = v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
  }
  read_if(j, "damping", p.ik.damping);
  read_if(j, "max_step", p.ik.max_step);
  read_if(j, "max_iterations", p.ik.max_iterations);
}

json anchors_json(const AnchorSet& set) {
  json a = json::array();
  for (const auto& p : set) a.push_back(to_json(p));
  return a;
}

AnchorSet anchors_from(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 6) throw ParseError(where + " must hold 6 anchors");
  AnchorSet set;
  for (std::size_t i = 0; i < 6; ++i) set[i] = vec3_from(j[i], where + "[" + std::to_string(i) + "]");
  return set;
}

// Geometry from either a parametric layout or explicit anchors.
PlatformGeometry platform_from(const json& j, const std::string& where) {
  check_keys(j, {"layout", "anchors"}, where);
  if (j.contains("layout") == j.contains("anchors")) {
    throw ParseError(where + " needs exactly one of 'layout' or 'anchors'");
  }
  if (j.contains("layout")) {
    const json& l = j.at("layout");
    check_keys(l,
               {"bottom_radius", "top_radius", "half_spread", "top_rotation", "leg_min", "leg_max", "theta_max"},
               where + ".layout");
    PlatformLayout layout;
    read_if(l, "bottom_radius", layout.bottom_radius);
    read_if(l, "top_radius", layout.top_radius);
    read_if(l, "half_spread", layout.half_spread);
    read_if(l, "top_rotation", layout.top_rotation);
    read_if(l, "leg_min", layout.leg_min);
    read_if(l, "leg_max", layout.leg_max);
    read_if(l, "theta_max", layout.theta_max);
    return make_platform(layout);
  }
  const json& a = j.at("anchors");
  check_keys(a, {"bottom", "top", "leg_min", "leg_max", "theta_max"}, where + ".anchors");
  PlatformGeometry g;
  g.bottom_anchors = anchors_from(a.at("bottom"), where + ".anchors.bottom");
  g.top_anchors = anchors_from(a.at("top"), where + ".anchors.top");
  read_if(a, "leg_min", g.leg_min);
  read_if(a, "leg_max", g.leg_max);
  read_if(a, "theta_max", g.theta_max);
  g.home_height = solve_home_height(g.bottom_anchors, g.top_anchors, g.leg_mid());
  validate(g);
  return g;
}

json scenario_json(const ScenarioSpec& s) {
  json j = {{"name", s.name},
            {"title", s.title},
            {"goal", {{"translation", to_json(s.goal.translation)}, {"rotation_axis_angle", to_json(s.goal.rotation)}}},
            {"masses", to_json(s.masses)},
            {"optimizer", to_json(s.config)}};
  j["helper_seed"] = s.helper_seed ? to_json(*s.helper_seed) : json(nullptr);
  return j;
}

void apply_scenario(const json& j, ScenarioSpec& s, const std::string& where) {
  check_keys(j, {"name", "title", "goal", "masses", "optimizer", "helper_seed"}, where);
  read_if(j, "title", s.title);
  if (j.contains("goal")) s.goal = taa_from(j.at("goal"), where + ".goal");
  if (j.contains("masses")) apply(j.at("masses"), s.masses, where + ".masses");
  if (j.contains("optimizer")) apply(j.at("optimizer"), s.config, where + ".optimizer");
  if (j.contains("helper_seed")) {
    const json& v = j.at("helper_seed");
    s.helper_seed = v.is_null() ? std::nullopt : std::optional(vector_from(v, where + ".helper_seed"));
  }
}

Setup setup_from(const json& root) {
  check_keys(root, {"stack", "masses", "initializer", "optimizer", "scenarios"}, "config");
  Setup setup = default_setup();

  if (root.contains("stack")) {
    const json& s = root.at("stack");
    check_keys(s, {"platforms", "platform", "base"}, "stack");
    std::size_t count = setup.stack.size();
    read_if(s, "platforms", count);
    if (count < 1) throw ParseError("stack.platforms must be at least 1");
    const PlatformGeometry g = s.contains("platform") ? platform_from(s.at("platform"), "stack.platform")
                                                      : setup.stack.platforms.front();
    setup.stack.platforms.assign(count, g);
    if (s.contains("base")) setup.stack.base = transform_from_taa(taa_from(s.at("base"), "stack.base"));
  }
  if (root.contains("masses")) apply(root.at("masses"), setup.masses, "masses");
  validate(setup.masses);
  for (auto& p : setup.stack.platforms) {
    p.plate_mass = setup.masses.plate_mass;
    p.motor_mass = setup.masses.motor_mass;
    p.shaft_mass = setup.masses.shaft_mass;
  }
  setup.stack.payload_mass = setup.masses.payload_mass;
  setup.stack.payload_offset = setup.masses.payload_offset;
  validate(setup.stack);

  if (root.contains("initializer")) apply(root.at("initializer"), setup.initializer, "initializer");
  if (root.contains("optimizer")) apply(root.at("optimizer"), setup.optimizer, "optimizer");
  validate(setup.optimizer);

  for (auto& s : setup.scenarios) {
    s.masses = setup.masses;
    s.config = setup.optimizer;
  }
  if (root.contains("scenarios")) {
    const json& list = root.at("scenarios");
    if (!list.is_array()) throw ParseError("scenarios must be an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string where = "scenarios[" + std::to_string(i) + "]";
      if (!list[i].is_object() || !list[i].contains("name")) throw ParseError(where + " needs a name");
      const std::string name = list[i].at("name").get<std::string>();
      ScenarioSpec* target = nullptr;
      for (auto& s : setup.scenarios) {
        if (s.name == name) target = &s;
      }
      if (!target) {
        if (!list[i].contains("goal")) throw ParseError(where + " adds scenario '" + name + "' without a goal");
        ScenarioSpec fresh;
        fresh.name = name;
        fresh.title = name;
        fresh.masses = setup.masses;
        fresh.config = setup.optimizer;
        setup.scenarios.push_back(fresh);
        target = &setup.scenarios.back();
      }
      apply_scenario(list[i], *target, where);
      validate(target->masses);
      validate(target->config);
    }
  }
  for (const auto& s : setup.scenarios) {
    if (s.helper_seed && static_cast<std::size_t>(s.helper_seed->size()) != 3 * setup.stack.size()) {
      throw ParseError("scenario '" + s.name + "' helper_seed needs " + std::to_string(3 * setup.stack.size()) +
                       " entries");
    }
  }
  return setup;
}

json pose_json(const StackPose& pose) {
  json plates = json::array();
  for (const auto& t : pose.plates) plates.push_back(to_json(t));
  return {{"plates", plates}};
}

json constraint_json(const ConstraintReport& report) {
  json j = json::object();
  for (const auto& g : report.groups) {
    j[g.name] = {{"worst", g.worst()}, {"margins", to_json(g.margins)}};
  }
  return j;
}

}  // namespace

Setup setup_from_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    return setup_from(root);
  } catch (const json::exception& e) {
    throw ParseError(std::string("config has a wrongly typed value: ") + e.what());
  }
}

Setup load_setup(const std::string& path) { return setup_from_json(read_file(path)); }

std::string setup_to_json(const Setup& setup) {
  const PlatformGeometry& g = setup.stack.platforms.front();
  json root;
  root["stack"] = {{"platforms", setup.stack.size()},
                   {"platform",
                    {{"anchors",
                      {{"bottom", anchors_json(g.bottom_anchors)},
                       {"top", anchors_json(g.top_anchors)},
                       {"leg_min", g.leg_min},
                       {"leg_max", g.leg_max},
                       {"theta_max", g.theta_max}}}}},
                   {"base", to_json(setup.stack.base)}};
  root["masses"] = to_json(setup.masses);
  root["initializer"] = to_json(setup.initializer);
  root["optimizer"] = to_json(setup.optimizer);
  json list = json::array();
  for (const auto& s : setup.scenarios) list.push_back(scenario_json(s));
  root["scenarios"] = list;
  return root.dump(2) + "\n";
}

std::string pose_to_json(const StackPose& pose) { return pose_json(pose).dump(2) + "\n"; }

StackPose pose_from_json(const std::string& text) {
  try {
    const json root = json::parse(text);
    check_keys(root, {"plates"}, "pose");
    const json& plates = root.at("plates");
    if (!plates.is_array() || plates.size() < 2) throw ParseError("pose.plates needs at least two plates");
    StackPose pose;
    for (std::size_t i = 0; i < plates.size(); ++i) {
      pose.plates.push_back(transform_from_taa(taa_from(plates[i], "pose.plates[" + std::to_string(i) + "]")));
    }
    return pose;
  } catch (const json::exception& e) {
    throw ParseError(std::string("pose is not valid: ") + e.what());
  }
}

std::string report_to_json(const ScenarioReport& r) {
  json j;
  j["name"] = r.spec.name;
  j["title"] = r.spec.title;
  j["goal"] = {{"translation", to_json(r.spec.goal.translation)},
               {"rotation_axis_angle", to_json(r.spec.goal.rotation)}};
  j["feasible"] = r.feasible;
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  j["link_length"] = r.link_length;
  j["objective_initial"] = r.objective_initial;
  j["objective_final"] = r.objective_final;
  j["max_abs_initial"] = r.max_abs_initial;
  j["max_abs_final"] = r.max_abs_final;
  j["mean_abs_initial"] = r.mean_abs_initial;
  j["mean_abs_final"] = r.mean_abs_final;
  j["forces_initial"] = to_json(r.init_forces);
  j["forces_final"] = to_json(r.final_forces);
  j["constraints_final"] = constraint_json(r.final_constraints);
  j["pose_initial"] = pose_json(r.initial_pose);
  j["pose_final"] = pose_json(r.final_pose);
  j["runtime_seconds"] = r.runtime;
  return j.dump(2) + "\n";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << contents;
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace assembler
