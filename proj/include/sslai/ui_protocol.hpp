#pragma once

// Operator channel messages. Snapshots go out as JSON objects with
// "type": "snapshot"; operator commands come in as JSON objects with a
// "kind" discriminator and are answered with "type": "ack" messages.
// Schemas: docs/schemas/state_snapshot.schema.json and
// docs/schemas/operator_command.schema.json.

#include <cmath>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "sslai/config.hpp"
#include "sslai/frame_engine.hpp"
#include "sslai/simulator.hpp"

namespace sslai {

using Json = nlohmann::json;

/// Everything the console draws for one frame. Immutable once published.
struct StateSnapshot {
  std::uint64_t frame_id = 0;
  GamePhase phase = GamePhase::Halt;
  bool simulated = false;
  bool paused = false;
  double elapsed = 0.0;
  FieldGeometry field;
  WorldFrame world;
  RoleAssignment assignment;
  std::map<int, RobotCommand> commands;
  std::set<int> manual;
  std::map<int, PathPolyline> paths;
  std::shared_ptr<const PotentialGrid> pass_grid;
  std::vector<MatchEvent> events;  // most recent last
  std::vector<std::string> errors;
};

namespace detail {

inline Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace detail

inline Json to_json(const StateSnapshot& s) {
  Json j;
  j["type"] = "snapshot";
  j["frame_id"] = s.frame_id;
  j["phase"] = to_string(s.phase);
  j["simulated"] = s.simulated;
  j["paused"] = s.paused;
  j["tick_elapsed_ms"] = s.elapsed * 1e3;
  j["field"] = {{"length", s.field.length},
                {"width", s.field.width},
                {"penalty_depth", s.field.penalty_depth},
                {"penalty_width", s.field.penalty_width},
                {"goal_width", s.field.goal_width},
                {"boundary_margin", s.field.boundary_margin}};

  Json robots = Json::array();
  for (const auto& r : s.world.robots) {
    robots.push_back({{"team", to_string(r.team)},
                      {"id", r.id},
                      {"x", r.pose.position.x},
                      {"y", r.pose.position.y},
                      {"yaw", r.pose.yaw},
                      {"vx", r.velocity.x},
                      {"vy", r.velocity.y},
                      {"vyaw", r.yaw_rate},
                      {"ball_contact", r.ball_contact}});
  }
  const auto& b = s.world.ball;
  j["world"] = {{"timestamp", s.world.timestamp},
                {"ball", {{"x", b.position.x}, {"y", b.position.y}, {"vx", b.velocity.x}, {"vy", b.velocity.y}}},
                {"robots", robots}};

  Json roles = Json::array();
  for (const auto& [id, r] : s.assignment.roles) roles.push_back({{"id", id}, {"role", to_string(r.kind)}, {"slot", r.slot}});
  j["assignment"] = roles;

  Json commands = Json::array();
  for (const auto& [id, c] : s.commands) {
    commands.push_back({{"id", id},
                        {"vx", c.vx},
                        {"vy", c.vy},
                        {"vtheta", c.vtheta},
                        {"kick", c.kick_power},
                        {"dribble", c.dribble_power},
                        {"manual", s.manual.count(id) > 0}});
  }
  j["commands"] = commands;

  Json paths = Json::array();
  for (const auto& [id, p] : s.paths) {
    Json pts = Json::array();
    for (const auto& w : p.waypoints) pts.push_back({w.x, w.y});
    paths.push_back({{"id", id}, {"points", pts}});
  }
  j["paths"] = paths;

  if (s.pass_grid) {
    const auto& g = s.pass_grid->shape();
    Json values = Json::array();
    for (std::size_t i = 0; i < s.pass_grid->size(); ++i) values.push_back(detail::finite_or_null((*s.pass_grid)[i]));
    j["pass_grid"] = {{"origin", {g.origin.x, g.origin.y}},
                      {"cell_size", g.cell_size},
                      {"cols", g.cols},
                      {"rows", g.rows},
                      {"values", std::move(values)}};
  } else {
    j["pass_grid"] = nullptr;
  }

  Json events = Json::array();
  for (const auto& e : s.events) events.push_back({{"tick", e.tick}, {"kind", to_string(e.kind)}, {"line", e.to_line()}});
  j["events"] = events;
  j["errors"] = s.errors;
  return j;
}

enum class CommandKind : std::uint8_t { Referee, ManualDrive, ParamSet, SimControl };

inline std::string_view to_string(CommandKind k) {
  switch (k) {
    case CommandKind::Referee: return "REFEREE";
    case CommandKind::ManualDrive: return "MANUAL_DRIVE";
    case CommandKind::ParamSet: return "PARAM_SET";
    case CommandKind::SimControl: return "SIM_CONTROL";
  }
  return "?";
}

enum class SimAction : std::uint8_t { Pause, Resume, Step };

struct OperatorCommand {
  CommandKind kind = CommandKind::Referee;
  Json id;  // client correlation value, echoed in the ack

  RefereeCommand referee = RefereeCommand::Halt;

  int robot = 0;
  bool release = false;
  RobotCommand drive;

  std::vector<std::pair<std::string, double>> params;

  SimAction action = SimAction::Pause;
  int steps = 1;
};

class CommandRejected : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Ack {
  Json id;
  std::string kind;
  bool ok = true;
  std::string reason;

  Json to_json() const {
    Json j{{"type", "ack"}, {"id", id}, {"kind", kind}, {"ok", ok}};
    if (!ok) j["reason"] = reason;
    return j;
  }
};

namespace detail {

inline const Json& require(const Json& j, const char* key) {
  if (!j.contains(key)) throw CommandRejected(std::string("missing field '") + key + "'");
  return j.at(key);
}

inline double number_field(const Json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  const Json& v = j.at(key);
  if (!v.is_number()) throw CommandRejected(std::string("field '") + key + "' must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw CommandRejected(std::string("field '") + key + "' must be finite");
  return d;
}

inline int power_field(const Json& j, const char* key) {
  const double v = number_field(j, key, 0.0);
  if (v < 0.0 || v > 100.0 || v != std::floor(v)) throw CommandRejected(std::string(key) + " must be an integer 0..100");
  return static_cast<int>(v);
}

}  // namespace detail

/// Validates a message. `authorized` is true when the connection already
/// presented the operator token; otherwise the message must carry it.
inline OperatorCommand parse_operator_command(const Json& j, const std::string& token, bool authorized) {
  if (!j.is_object()) throw CommandRejected("message must be a JSON object");
  if (!token.empty() && !authorized) {
    if (!j.contains("token") || !j.at("token").is_string() || j.at("token").get<std::string>() != token)
      throw CommandRejected("bad token");
  }
  OperatorCommand c;
  if (j.contains("id")) c.id = j.at("id");
  const Json& kind = detail::require(j, "kind");
  if (!kind.is_string()) throw CommandRejected("kind must be a string");
  const auto k = kind.get<std::string>();

  if (k == "REFEREE") {
    c.kind = CommandKind::Referee;
    const Json& cmd = detail::require(j, "command");
    if (!cmd.is_string()) throw CommandRejected("command must be a string");
    auto rc = referee_command_from_string(cmd.get<std::string>());
    if (!rc) throw CommandRejected("unknown referee command '" + cmd.get<std::string>() + "'");
    c.referee = *rc;
  } else if (k == "MANUAL_DRIVE") {
    c.kind = CommandKind::ManualDrive;
    const Json& robot = detail::require(j, "robot");
    if (!robot.is_number_integer() || robot.get<int>() < 0 || robot.get<int>() >= kMaxRobotsPerTeam)
      throw CommandRejected("robot must be an integer id 0..15");
    c.robot = robot.get<int>();
    if (j.contains("release")) {
      if (!j.at("release").is_boolean()) throw CommandRejected("release must be a boolean");
      c.release = j.at("release").get<bool>();
    }
    if (!c.release) {
      c.drive.vx = detail::number_field(j, "vx", 0.0);
      c.drive.vy = detail::number_field(j, "vy", 0.0);
      c.drive.vtheta = detail::number_field(j, "vtheta", 0.0);
      c.drive.kick_power = detail::power_field(j, "kick");
      c.drive.dribble_power = detail::power_field(j, "dribble");
    }
  } else if (k == "PARAM_SET") {
    c.kind = CommandKind::ParamSet;
    const Json& params = detail::require(j, "params");
    if (!params.is_object() || params.empty()) throw CommandRejected("params must be a non-empty object");
    for (const auto& [name, value] : params.items()) {
      const ParamSpec* spec = find_param(name);
      if (spec == nullptr) throw CommandRejected("unknown param '" + name + "'");
      if (!spec->tunable) throw CommandRejected("param '" + name + "' is not tunable");
      if (!value.is_number() || !std::isfinite(value.get<double>()))
        throw CommandRejected("param '" + name + "' needs a finite number");
      c.params.emplace_back(name, value.get<double>());
    }
  } else if (k == "SIM_CONTROL") {
    c.kind = CommandKind::SimControl;
    const Json& action = detail::require(j, "action");
    const std::string a = action.is_string() ? action.get<std::string>() : "";
    if (a == "pause") {
      c.action = SimAction::Pause;
    } else if (a == "resume") {
      c.action = SimAction::Resume;
    } else if (a == "step") {
      c.action = SimAction::Step;
      const double n = detail::number_field(j, "steps", 1.0);
      if (n < 1 || n > 10000 || n != std::floor(n)) throw CommandRejected("steps must be an integer 1..10000");
      c.steps = static_cast<int>(n);
    } else {
      throw CommandRejected("action must be pause, resume or step");
    }
  } else {
    throw CommandRejected("unknown kind '" + k + "'");
  }
  return c;
}

inline Ack rejection(const Json& msg, const std::string& reason) {
  Ack a;
  if (msg.is_object() && msg.contains("id")) a.id = msg.at("id");
  if (msg.is_object() && msg.contains("kind") && msg.at("kind").is_string()) a.kind = msg.at("kind").get<std::string>();
  a.ok = false;
  a.reason = reason;
  return a;
}

/// Command inbox. Gateway threads submit; the engine loop drains it between
/// ticks and answers each command through its callback.
class OperatorConsole {
 public:
  using Reply = std::function<void(const Ack&)>;

  struct Pending {
    OperatorCommand command;
    Reply reply;
  };

  void submit(OperatorCommand cmd, Reply reply = {}) {
    std::lock_guard lk(mu_);
    inbox_.push_back({std::move(cmd), std::move(reply)});
  }

  std::vector<Pending> drain() {
    std::lock_guard lk(mu_);
    std::vector<Pending> out(std::make_move_iterator(inbox_.begin()), std::make_move_iterator(inbox_.end()));
    inbox_.clear();
    return out;
  }

 private:
  std::mutex mu_;
  std::deque<Pending> inbox_;
};

/// Latest-snapshot slot. publish() swaps a pointer under a short lock and
/// never waits on readers.
class SnapshotHub {
 public:
  void publish(std::shared_ptr<const StateSnapshot> s) {
    std::lock_guard lk(mu_);
    latest_ = std::move(s);
    ++version_;
  }

  std::pair<std::uint64_t, std::shared_ptr<const StateSnapshot>> latest() const {
    std::lock_guard lk(mu_);
    return {version_, latest_};
  }

 private:
  mutable std::mutex mu_;
  std::shared_ptr<const StateSnapshot> latest_;
  std::uint64_t version_ = 0;
};

}  // namespace sslai
