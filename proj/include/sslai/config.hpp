#pragma once

// Plain-text configuration: one `key = value` per line, SI units, `#`
// starts a comment. Every key has a documented default; unknown keys are
// rejected. Keys flagged tunable may also be changed while running.

#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sslai/motion_control.hpp"
#include "sslai/path_plan.hpp"
#include "sslai/radio.hpp"
#include "sslai/simulator.hpp"
#include "sslai/strategy.hpp"

namespace sslai {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class OpponentMode : std::uint8_t { Mirror, Static, None };

struct UiSettings {
  int port = 8080;
  std::string token;
  double publish_hz = 30.0;
  std::string static_dir;
};

struct EngineConfig {
  StrategySettings strategy;
  ControlSettings control;
  PlannerOptions planner{0.05, 6, {}};
  double planner_horizon = 1.0;  // retry radius after a blocked plan
  double frame_rate = 60.0;
  int vision_port = 10020;
  int referee_port = 10021;
  UiSettings ui;
  SimConfig sim;
  int robots_per_side = 6;
  OpponentMode opponents = OpponentMode::Mirror;
  std::vector<RobotEndpoint> endpoints;

  double dt() const { return 1.0 / frame_rate; }
  const FieldGeometry& field() const { return strategy.field; }
  const RobotParams& robot() const { return strategy.robot; }

  /// Simulator physics stepping at the engine frame period.
  PhysicsContext physics() const {
    SimConfig s = sim;
    s.dt = dt();
    return {s, strategy.robot, strategy.field};
  }

  void validate() const {
    if (!strategy.field.valid()) throw ConfigError("field geometry is inconsistent");
    if (!strategy.robot.valid()) throw ConfigError("robot parameters are invalid");
    if (!control.profile.valid()) throw ConfigError("motion profile needs a_max > 0, 0 < v_cut < v_max, stop_epsilon > 0");
    if (control.gains.kp < 0 || control.gains.kd < 0) throw ConfigError("yaw gains must be non-negative");
    if (!(control.omega_limit > 0) || !(control.stop_speed_cap > 0)) throw ConfigError("speed limits must be positive");
    if (planner.max_depth < 1 || planner.margin < 0) throw ConfigError("planner needs max_depth >= 1, margin >= 0");
    if (!(planner_horizon > 0)) throw ConfigError("planner horizon must be positive");
    if (!(strategy.potential.cell_size > 0) || !(strategy.potential.crowd_falloff > 0))
      throw ConfigError("potential cell size and falloff must be positive");
    if (!(frame_rate > 0)) throw ConfigError("frame rate must be positive");
    if (!sim.valid()) throw ConfigError("simulator settings are invalid");
    if (robots_per_side < 0 || robots_per_side > kMaxRobotsPerTeam) throw ConfigError("robots_per_side out of range");
    if (!(ui.publish_hz > 0)) throw ConfigError("ui publish rate must be positive");
    RolePolicy::validate_table(strategy.policy.attacking);
    RolePolicy::validate_table(strategy.policy.defending);
  }
};

struct ParamSpec {
  std::string key;
  bool tunable = false;
  std::function<void(EngineConfig&, std::string_view)> set;
  std::function<std::string(const EngineConfig&)> get;
};

namespace detail {

inline double to_double(std::string_view key, std::string_view v) {
  auto d = parse_number<double>(v);
  if (!d || !std::isfinite(*d)) throw ConfigError(std::string(key) + ": expected a number, got '" + std::string(v) + "'");
  return *d;
}

inline int to_int(std::string_view key, std::string_view v) {
  auto i = parse_number<int>(v);
  if (!i) throw ConfigError(std::string(key) + ": expected an integer, got '" + std::string(v) + "'");
  return *i;
}

inline std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

template <typename Access>
ParamSpec real(std::string key, bool tunable, Access access) {
  return {key, tunable,
          [key, access](EngineConfig& c, std::string_view v) { access(c) = to_double(key, v); },
          [access](const EngineConfig& c) { return fmt_double(access(const_cast<EngineConfig&>(c))); }};
}

template <typename Access>
ParamSpec integer(std::string key, bool tunable, Access access) {
  return {key, tunable,
          [key, access](EngineConfig& c, std::string_view v) { access(c) = to_int(key, v); },
          [access](const EngineConfig& c) { return std::to_string(access(const_cast<EngineConfig&>(c))); }};
}

inline std::vector<RoleKind> parse_table(std::string_view key, std::string_view v) {
  std::vector<RoleKind> out;
  for (auto tok : split(v, ',')) {
    auto k = role_from_string(trim(tok));
    if (!k) throw ConfigError(std::string(key) + ": unknown role '" + std::string(trim(tok)) + "'");
    out.push_back(*k);
  }
  try {
    RolePolicy::validate_table(out);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string(key) + ": " + e.what());
  }
  return out;
}

inline std::string format_table(const std::vector<RoleKind>& t) {
  std::string out;
  for (auto k : t) {
    if (!out.empty()) out += ',';
    out += to_string(k);
  }
  return out;
}

}  // namespace detail

/// Every recognised key. Angles in configuration are degrees where the key
/// says so, radians otherwise.
inline const std::vector<ParamSpec>& param_table() {
  using detail::integer;
  using detail::real;
  using C = EngineConfig;
  static const std::vector<ParamSpec> table = [] {
    std::vector<ParamSpec> t;
    t.push_back(real("field.length", false, [](C& c) -> double& { return c.strategy.field.length; }));
    t.push_back(real("field.width", false, [](C& c) -> double& { return c.strategy.field.width; }));
    t.push_back(real("field.penalty_depth", false, [](C& c) -> double& { return c.strategy.field.penalty_depth; }));
    t.push_back(real("field.penalty_width", false, [](C& c) -> double& { return c.strategy.field.penalty_width; }));
    t.push_back(real("field.goal_width", false, [](C& c) -> double& { return c.strategy.field.goal_width; }));
    t.push_back(real("field.boundary_margin", false, [](C& c) -> double& { return c.strategy.field.boundary_margin; }));

    t.push_back(real("robot.wheel_radius", false, [](C& c) -> double& { return c.strategy.robot.wheel_radius; }));
    t.push_back(real("robot.wheel_offset_radius", false,
                     [](C& c) -> double& { return c.strategy.robot.wheel_offset_radius; }));
    t.push_back(real("robot.max_wheel_rpm", false, [](C& c) -> double& { return c.strategy.robot.max_wheel_rpm; }));
    t.push_back(real("robot.radius", false, [](C& c) -> double& { return c.strategy.robot.robot_radius; }));
    t.push_back(real("robot.com_height", false, [](C& c) -> double& { return c.strategy.robot.com_height; }));
    t.push_back({"robot.wheel_azimuths_deg", false,
                 [](C& c, std::string_view v) {
                   auto parts = detail::split(v, ',');
                   if (parts.size() != 4) throw ConfigError("robot.wheel_azimuths_deg: expected 4 angles");
                   for (std::size_t i = 0; i < 4; ++i)
                     c.strategy.robot.wheel_azimuths[i] = detail::to_double("robot.wheel_azimuths_deg", parts[i]) * kPi / 180.0;
                 },
                 [](const C& c) {
                   std::string out;
                   for (double a : c.strategy.robot.wheel_azimuths) {
                     if (!out.empty()) out += ',';
                     out += detail::fmt_double(a * 180.0 / kPi);
                   }
                   return out;
                 }});

    t.push_back(real("motion.a_max", true, [](C& c) -> double& { return c.control.profile.a_max; }));
    t.push_back(real("motion.v_max", true, [](C& c) -> double& { return c.control.profile.v_max; }));
    t.push_back(real("motion.v_cut", true, [](C& c) -> double& { return c.control.profile.v_cut; }));
    t.push_back(real("motion.stop_epsilon", true, [](C& c) -> double& { return c.control.profile.stop_epsilon; }));
    t.push_back(real("motion.kp", true, [](C& c) -> double& { return c.control.gains.kp; }));
    t.push_back(real("motion.kd", true, [](C& c) -> double& { return c.control.gains.kd; }));
    t.push_back(real("motion.omega_limit", true, [](C& c) -> double& { return c.control.omega_limit; }));
    t.push_back(real("motion.stop_speed_cap", true, [](C& c) -> double& { return c.control.stop_speed_cap; }));

    t.push_back(real("path.margin", true, [](C& c) -> double& { return c.planner.margin; }));
    t.push_back(integer("path.max_depth", true, [](C& c) -> int& { return c.planner.max_depth; }));
    t.push_back(real("path.horizon", true, [](C& c) -> double& { return c.planner_horizon; }));

    t.push_back(real("potential.cell_size", false, [](C& c) -> double& { return c.strategy.potential.cell_size; }));
    t.push_back(real("potential.shadow_weight", true, [](C& c) -> double& { return c.strategy.potential.shadow_weight; }));
    t.push_back(
        real("potential.gradient_weight", true, [](C& c) -> double& { return c.strategy.potential.gradient_weight; }));
    t.push_back(real("potential.crowd_weight", true, [](C& c) -> double& { return c.strategy.potential.crowd_weight; }));
    t.push_back(real("potential.crowd_falloff", true, [](C& c) -> double& { return c.strategy.potential.crowd_falloff; }));
    t.push_back(real("potential.receiver_separation", true,
                     [](C& c) -> double& { return c.strategy.potential.receiver_separation; }));
    t.push_back(
        real("potential.min_pass_distance", true, [](C& c) -> double& { return c.strategy.potential.min_pass_distance; }));
    t.push_back(
        real("potential.max_pass_distance", true, [](C& c) -> double& { return c.strategy.potential.max_pass_distance; }));
    t.push_back(real("potential.edge_margin", true, [](C& c) -> double& { return c.strategy.potential.edge_margin; }));

    t.push_back(real("skills.defender_spacing", true, [](C& c) -> double& { return c.strategy.skills.defender_spacing; }));
    t.push_back(real("skills.aim_tolerance", true, [](C& c) -> double& { return c.strategy.skills.aim_tolerance; }));
    t.push_back(real("skills.shot_range", true, [](C& c) -> double& { return c.strategy.skills.shot_range; }));
    t.push_back(real("skills.pass_arrive_speed", true, [](C& c) -> double& { return c.strategy.skills.pass_arrive_speed; }));
    t.push_back(real("skills.dribble_radius", true, [](C& c) -> double& { return c.strategy.skills.dribble_radius; }));
    t.push_back(real("skills.hold_distance", false, [](C& c) -> double& { return c.strategy.skills.hold_distance; }));

    t.push_back({"policy.attack", false,
                 [](C& c, std::string_view v) { c.strategy.policy.attacking = detail::parse_table("policy.attack", v); },
                 [](const C& c) { return detail::format_table(c.strategy.policy.attacking); }});
    t.push_back({"policy.defend", false,
                 [](C& c, std::string_view v) { c.strategy.policy.defending = detail::parse_table("policy.defend", v); },
                 [](const C& c) { return detail::format_table(c.strategy.policy.defending); }});

    t.push_back(real("engine.frame_rate", false, [](C& c) -> double& { return c.frame_rate; }));
    t.push_back(integer("engine.vision_port", false, [](C& c) -> int& { return c.vision_port; }));
    t.push_back(integer("engine.referee_port", false, [](C& c) -> int& { return c.referee_port; }));

    t.push_back(integer("ui.port", false, [](C& c) -> int& { return c.ui.port; }));
    t.push_back(real("ui.publish_hz", false, [](C& c) -> double& { return c.ui.publish_hz; }));
    t.push_back({"ui.token", false, [](C& c, std::string_view v) { c.ui.token = std::string(v); },
                 [](const C& c) { return c.ui.token; }});
    t.push_back({"ui.static_dir", false, [](C& c, std::string_view v) { c.ui.static_dir = std::string(v); },
                 [](const C& c) { return c.ui.static_dir; }});

    t.push_back(real("sim.ball_friction_decel", false, [](C& c) -> double& { return c.sim.ball_friction_decel; }));
    t.push_back(real("sim.kick_speed_max", false, [](C& c) -> double& { return c.sim.kick_speed_max; }));
    t.push_back(real("sim.capture_distance", false, [](C& c) -> double& { return c.sim.capture_distance; }));
    t.push_back({"sim.capture_half_angle_deg", false,
                 [](C& c, std::string_view v) {
                   c.sim.capture_half_angle = detail::to_double("sim.capture_half_angle_deg", v) * kPi / 180.0;
                 },
                 [](const C& c) { return detail::fmt_double(c.sim.capture_half_angle * 180.0 / kPi); }});
    t.push_back(real("sim.hold_distance", false, [](C& c) -> double& { return c.sim.hold_distance; }));
    t.push_back(real("sim.wall_restitution", false, [](C& c) -> double& { return c.sim.wall_restitution; }));
    t.push_back(integer("sim.kick_cooldown_ticks", false, [](C& c) -> int& { return c.sim.kick_cooldown_ticks; }));
    t.push_back(integer("sim.robots_per_side", false, [](C& c) -> int& { return c.robots_per_side; }));
    t.push_back({"sim.seed", false,
                 [](C& c, std::string_view v) {
                   auto s = detail::parse_number<std::uint64_t>(v);
                   if (!s) throw ConfigError("sim.seed: expected an unsigned integer");
                   c.sim.seed = *s;
                 },
                 [](const C& c) { return std::to_string(c.sim.seed); }});
    t.push_back({"sim.opponents", false,
                 [](C& c, std::string_view v) {
                   if (v == "mirror") c.opponents = OpponentMode::Mirror;
                   else if (v == "static") c.opponents = OpponentMode::Static;
                   else if (v == "none") c.opponents = OpponentMode::None;
                   else throw ConfigError("sim.opponents: expected mirror, static or none");
                 },
                 [](const C& c) -> std::string {
                   switch (c.opponents) {
                     case OpponentMode::Mirror: return "mirror";
                     case OpponentMode::Static: return "static";
                     case OpponentMode::None: return "none";
                   }
                   return "mirror";
                 }});
    return t;
  }();
  return table;
}

/// Short names accepted for tunables, e.g. "v_max" for "motion.v_max".
inline const ParamSpec* find_param(std::string_view name) {
  for (const auto& p : param_table()) {
    if (p.key == name) return &p;
  }
  for (const auto& p : param_table()) {
    const auto dot = p.key.rfind('.');
    if (p.tunable && std::string_view(p.key).substr(dot + 1) == name) return &p;
  }
  return nullptr;
}

/// Sets one key. `robot.<id>.addr` keys build the endpoint table.
inline void apply_setting(EngineConfig& cfg, std::string_view key, std::string_view value) {
  if (key.starts_with("robot.") && key.ends_with(".addr")) {
    const auto id_text = key.substr(6, key.size() - 6 - 5);
    auto id = detail::parse_number<int>(id_text);
    if (!id || *id < 0 || *id >= kMaxRobotsPerTeam) throw ConfigError(std::string(key) + ": bad robot id");
    try {
      RobotEndpoint ep = parse_endpoint(*id, value);
      std::erase_if(cfg.endpoints, [&](const RobotEndpoint& e) { return e.robot_id == *id; });
      cfg.endpoints.push_back(std::move(ep));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string(key) + ": " + e.what());
    }
    return;
  }
  for (const auto& p : param_table()) {
    if (p.key == key) {
      p.set(cfg, detail::trim(value));
      return;
    }
  }
  throw ConfigError("unknown key '" + std::string(key) + "'");
}

/// Hot-swaps a tunable parameter; rejects unknown or non-tunable names and
/// values that leave the configuration invalid (the old value is kept).
inline void set_tunable(EngineConfig& cfg, std::string_view name, double value) {
  const ParamSpec* p = find_param(name);
  if (p == nullptr) throw ConfigError("unknown param '" + std::string(name) + "'");
  if (!p->tunable) throw ConfigError("param '" + p->key + "' is not tunable");
  EngineConfig next = cfg;
  p->set(next, detail::fmt_double(value));
  next.validate();
  cfg = std::move(next);
}

inline EngineConfig parse_config(std::istream& in) {
  EngineConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view v = line;
    if (auto hash = v.find('#'); hash != std::string_view::npos) v = v.substr(0, hash);
    v = detail::trim(v);
    if (v.empty()) continue;
    const auto eq = v.find('=');
    if (eq == std::string_view::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    try {
      apply_setting(cfg, detail::trim(v.substr(0, eq)), detail::trim(v.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

inline EngineConfig parse_config(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_config(in);
}

inline EngineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  return parse_config(in);
}

/// Every key with its current value, in table order.
inline std::string dump_config(const EngineConfig& cfg) {
  std::string out;
  for (const auto& p : param_table()) out += p.key + " = " + p.get(cfg) + "\n";
  for (const auto& e : cfg.endpoints)
    out += "robot." + std::to_string(e.robot_id) + ".addr = " +
           (e.transport == TransportKind::Serial ? "serial:" + e.address : e.address) + "\n";
  return out;
}

}  // namespace sslai
