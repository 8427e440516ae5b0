#pragma once

// Kinematic match physics: robots follow their clamped commands exactly,
// the ball rolls with constant friction deceleration, a dribbling robot
// holds a captured ball at its mouth, and a kick launches the ball along
// the robot's heading at a speed linear in kick power.

#include <cmath>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sslai/motion_control.hpp"
#include "sslai/world_model.hpp"

namespace sslai {

struct SimConfig {
  double dt = 1.0 / 60.0;
  double ball_friction_decel = 0.5;
  double kick_speed_max = 6.5;
  double capture_distance = 0.12;
  double capture_half_angle = 20.0 * kPi / 180.0;
  double hold_distance = 0.09;
  double wall_restitution = 0.5;
  int kick_cooldown_ticks = 15;
  std::uint64_t seed = 1;

  bool valid() const {
    return dt > 0 && ball_friction_decel > 0 && kick_speed_max > 0 && capture_distance > 0 &&
           capture_half_angle > 0 && hold_distance > 0 && hold_distance < capture_distance &&
           wall_restitution >= 0 && wall_restitution <= 1 && kick_cooldown_ticks >= 0;
  }
};

struct RobotKey {
  Team team = Team::Ours;
  int id = 0;

  auto operator<=>(const RobotKey&) const = default;
};

using CommandMap = std::map<RobotKey, RobotCommand>;

enum class EventKind : std::uint8_t { Kick, PassCompleted, BallContactGained, PhaseChange, Goal };

inline std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::Kick: return "KICK";
    case EventKind::PassCompleted: return "PASS_COMPLETED";
    case EventKind::BallContactGained: return "BALL_CONTACT_GAINED";
    case EventKind::PhaseChange: return "PHASE_CHANGE";
    case EventKind::Goal: return "GOAL";
  }
  return "?";
}

inline std::optional<EventKind> event_kind_from_string(std::string_view s) {
  for (auto k : {EventKind::Kick, EventKind::PassCompleted, EventKind::BallContactGained, EventKind::PhaseChange,
                 EventKind::Goal})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

/// Log line: `<tick> <KIND> <subjects...>`. Robot events carry the team
/// then robot ids (KICK us 3; PASS_COMPLETED us 3 5); GOAL carries the
/// scoring team; PHASE_CHANGE carries the new phase name.
struct MatchEvent {
  std::uint64_t tick = 0;
  EventKind kind = EventKind::Kick;
  Team team = Team::Ours;
  std::vector<int> ids;
  GamePhase phase = GamePhase::Halt;

  bool operator==(const MatchEvent&) const = default;

  std::string to_line() const {
    std::ostringstream os;
    os << tick << ' ' << to_string(kind);
    if (kind == EventKind::PhaseChange) {
      os << ' ' << to_string(phase);
    } else {
      os << ' ' << to_string(team);
      for (int id : ids) os << ' ' << id;
    }
    return os.str();
  }

  static std::optional<MatchEvent> from_line(std::string_view line) {
    std::istringstream is{std::string(line)};
    MatchEvent e;
    std::string kind, subject;
    if (!(is >> e.tick >> kind >> subject)) return std::nullopt;
    auto k = event_kind_from_string(kind);
    if (!k) return std::nullopt;
    e.kind = *k;
    if (e.kind == EventKind::PhaseChange) {
      auto p = phase_from_string(subject);
      if (!p) return std::nullopt;
      e.phase = *p;
    } else {
      auto t = team_from_string(subject);
      if (!t) return std::nullopt;
      e.team = *t;
      int id;
      while (is >> id) e.ids.push_back(id);
      if (!is.eof()) return std::nullopt;
    }
    return e;
  }
};

/// Ball detector: ball centre within capture_distance of the robot centre
/// and within +-capture_half_angle of its heading.
inline bool ball_contact(const RobotState& robot, const BallState& ball, const SimConfig& cfg) {
  const Vec2 d = ball.position - robot.pose.position;
  const double dist = d.norm();
  if (dist > cfg.capture_distance) return false;
  if (dist == 0.0) return true;
  return std::abs(wrap_angle(d.angle() - robot.pose.yaw)) <= cfg.capture_half_angle;
}

struct SimState {
  WorldFrame world;
  std::uint64_t tick = 0;
  std::optional<RobotKey> holder;
  std::map<RobotKey, int> cooldown;  // ticks until a kicker may capture again

  bool operator==(const SimState&) const = default;
};

struct StepOutcome {
  SimState state;
  std::vector<MatchEvent> events;
};

struct PhysicsContext {
  SimConfig sim;
  RobotParams robot;
  FieldGeometry field;
};

namespace detail {

inline Vec2 mouth_point(const RobotState& r, double hold) {
  return r.pose.position + Vec2::from_angle(r.pose.yaw) * hold;
}

}  // namespace detail

/// Advances the world by one tick. Robots without a command stop.
inline StepOutcome step(const SimState& current, const CommandMap& commands, const PhysicsContext& ctx) {
  const auto& cfg = ctx.sim;
  StepOutcome out{current, {}};
  SimState& s = out.state;
  WorldFrame& w = s.world;
  s.tick += 1;
  w.frame_id += 1;
  w.timestamp += cfg.dt;

  auto command_for = [&](const RobotState& r) {
    auto it = commands.find({r.team, r.id});
    return it == commands.end() ? RobotCommand{} : clamp_command(it->second, ctx.robot);
  };

  // Kick: a robot whose detector saw the ball last frame and asks for a kick.
  // The holder goes first; otherwise the lowest key wins.
  const RobotState* kicker = nullptr;
  for (const auto& r : current.world.robots) {
    if (!r.ball_contact || command_for(r).kick_power <= 0) continue;
    const bool is_holder = current.holder && *current.holder == RobotKey{r.team, r.id};
    if (kicker == nullptr || is_holder) kicker = &r;
    if (is_holder) break;
  }
  bool kicked = false;
  std::optional<RobotKey> kicked_key;
  if (kicker != nullptr) {
    const double speed = command_for(*kicker).kick_power / 100.0 * cfg.kick_speed_max;
    const Vec2 heading = Vec2::from_angle(kicker->pose.yaw);
    w.ball.position = detail::mouth_point(*kicker, cfg.hold_distance);
    w.ball.velocity = heading * speed;
    s.holder.reset();
    s.cooldown[{kicker->team, kicker->id}] = cfg.kick_cooldown_ticks;
    out.events.push_back({s.tick, EventKind::Kick, kicker->team, {kicker->id}, {}});
    kicked = true;
    kicked_key = RobotKey{kicker->team, kicker->id};
  }

  const double hx = ctx.field.length / 2.0 + ctx.field.boundary_margin;
  const double hy = ctx.field.width / 2.0 + ctx.field.boundary_margin;
  for (auto& r : w.robots) {
    const RobotCommand c = command_for(r);
    const Vec2 v_field = Vec2{c.vx, c.vy}.rotated(r.pose.yaw);
    const Vec2 before = r.pose.position;
    Vec2 p = before + v_field * cfg.dt;
    p.x = std::clamp(p.x, -hx, hx);
    p.y = std::clamp(p.y, -hy, hy);
    r.pose = Pose(p, r.pose.yaw + c.vtheta * cfg.dt);
    r.velocity = (p - before) / cfg.dt;
    r.yaw_rate = c.vtheta;
  }

  // Ball: held, released, or rolling.
  bool held = false;
  if (!kicked && s.holder) {
    RobotState* h = w.find(s.holder->team, s.holder->id);
    if (h != nullptr && command_for(*h).dribble_power > 0) {
      w.ball.position = detail::mouth_point(*h, cfg.hold_distance);
      w.ball.velocity = h->velocity;
      held = true;
    } else {
      if (h != nullptr) w.ball.velocity = h->velocity;
      s.holder.reset();
    }
  }
  if (!held) {
    const Vec2 v = w.ball.velocity;
    w.ball.position += v * cfg.dt;
    const double speed = v.norm();
    // the launch speed holds for the kick tick itself
    const double slowed = kicked ? speed : std::max(0.0, speed - cfg.ball_friction_decel * cfg.dt);
    w.ball.velocity = speed > 0.0 ? v * (slowed / speed) : Vec2{};
  }

  // Goal line crossing inside the mouth; otherwise the walls reflect.
  const double gx = ctx.field.length / 2.0;
  Vec2& bp = w.ball.position;
  if (std::abs(bp.x) > gx && std::abs(bp.y) < ctx.field.goal_width / 2.0) {
    const Team scorer = bp.x > 0.0 ? Team::Ours : Team::Theirs;
    out.events.push_back({s.tick, EventKind::Goal, scorer, {}, {}});
    w.ball = {};
    s.holder.reset();
    held = false;
  } else {
    Vec2& bv = w.ball.velocity;
    if (std::abs(bp.x) > hx) {
      bp.x = std::copysign(hx, bp.x);
      bv.x = -bv.x * cfg.wall_restitution;
    }
    if (std::abs(bp.y) > hy) {
      bp.y = std::copysign(hy, bp.y);
      bv.y = -bv.y * cfg.wall_restitution;
    }
  }

  // Ball detectors and capture.
  for (auto& [key, ticks] : s.cooldown) ticks = std::max(0, ticks - 1);
  std::optional<RobotKey> capture;
  double capture_dist = 0.0;
  for (auto& r : w.robots) {
    const RobotKey key{r.team, r.id};
    const bool was = r.ball_contact && !(kicked_key && *kicked_key == key);
    const bool cooling = s.cooldown.count(key) && s.cooldown[key] > 0;
    const bool is_holder = s.holder && *s.holder == key;
    r.ball_contact = is_holder || (!cooling && ball_contact(r, w.ball, cfg));
    if (r.ball_contact && !was) out.events.push_back({s.tick, EventKind::BallContactGained, r.team, {r.id}, {}});
    if (!s.holder && r.ball_contact && command_for(r).dribble_power > 0) {
      const double d = distance(r.pose.position, w.ball.position);
      if (!capture || d < capture_dist) {
        capture = key;
        capture_dist = d;
      }
    }
  }
  if (!s.holder && capture) {
    s.holder = capture;
    const RobotState* h = w.find(capture->team, capture->id);
    w.ball.position = detail::mouth_point(*h, cfg.hold_distance);
    w.ball.velocity = h->velocity;
  }
  std::erase_if(s.cooldown, [](const auto& e) { return e.second == 0; });
  return out;
}

}  // namespace sslai
