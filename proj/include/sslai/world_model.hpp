#pragma once

// Core value types shared by every stage of the pipeline: planar vectors,
// robot and ball states, the per-frame world snapshot, field geometry,
// drive parameters, and the referee-driven game phase machine.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sslai {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kBallRadius = 0.0215;
inline constexpr int kMaxRobotsPerTeam = 16;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2() = default;
  constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
  constexpr Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  constexpr Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
  constexpr bool operator==(const Vec2&) const = default;

  constexpr double dot(Vec2 o) const { return x * o.x + y * o.y; }
  constexpr double cross(Vec2 o) const { return x * o.y - y * o.x; }
  constexpr double norm2() const { return x * x + y * y; }
  double norm() const { return std::sqrt(x * x + y * y); }
  double angle() const { return std::atan2(y, x); }
  /// Counter-clockwise perpendicular.
  constexpr Vec2 perp() const { return {-y, x}; }

  Vec2 normalized() const {
    const double n = norm();
    return n > 0.0 ? Vec2{x / n, y / n} : Vec2{};
  }

  Vec2 rotated(double theta) const {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    return {c * x - s * y, s * x + c * y};
  }

  bool finite() const { return std::isfinite(x) && std::isfinite(y); }

  static Vec2 from_angle(double theta) { return {std::cos(theta), std::sin(theta)}; }
};

constexpr Vec2 operator*(double s, Vec2 v) { return v * s; }

inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }

/// Maps theta onto (-pi, pi]. Throws std::domain_error on NaN/inf.
inline double wrap_angle(double theta) {
  if (!std::isfinite(theta)) throw std::domain_error("wrap_angle: non-finite angle");
  double r = std::remainder(theta, kTwoPi);
  if (r <= -kPi) r += kTwoPi;
  if (r > kPi) r -= kTwoPi;
  return r;
}

/// Distance from p to the closed segment ab; a == b degenerates to |p - a|.
inline double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = ab.norm2();
  if (len2 == 0.0) return distance(p, a);
  double t = (p - a).dot(ab) / len2;
  t = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
  return distance(p, a + ab * t);
}

/// Closest point of segment ab to p.
inline Vec2 closest_point_on_segment(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = ab.norm2();
  if (len2 == 0.0) return a;
  double t = (p - a).dot(ab) / len2;
  t = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
  return a + ab * t;
}

struct Pose {
  Vec2 position;
  double yaw = 0.0;

  Pose() = default;
  Pose(Vec2 p, double theta) : position(p), yaw(wrap_angle(theta)) {}
  bool operator==(const Pose&) const = default;
};

enum class Team : std::uint8_t { Ours, Theirs };

inline Team other(Team t) { return t == Team::Ours ? Team::Theirs : Team::Ours; }

inline std::string_view to_string(Team t) { return t == Team::Ours ? "us" : "them"; }

inline std::optional<Team> team_from_string(std::string_view s) {
  if (s == "us") return Team::Ours;
  if (s == "them") return Team::Theirs;
  return std::nullopt;
}

struct RobotState {
  int id = 0;
  Team team = Team::Ours;
  Pose pose;
  Vec2 velocity;
  double yaw_rate = 0.0;
  bool ball_contact = false;

  bool operator==(const RobotState&) const = default;
};

struct BallState {
  Vec2 position;
  Vec2 velocity;

  bool operator==(const BallState&) const = default;
};

/// One vision frame: the latest frame is the truth, no filtering.
struct WorldFrame {
  std::uint64_t frame_id = 0;
  double timestamp = 0.0;
  BallState ball;
  std::vector<RobotState> robots;

  bool operator==(const WorldFrame&) const = default;

  std::vector<const RobotState*> team(Team t) const {
    std::vector<const RobotState*> out;
    for (const auto& r : robots)
      if (r.team == t) out.push_back(&r);
    return out;
  }

  const RobotState* find(Team t, int id) const {
    for (const auto& r : robots)
      if (r.team == t && r.id == id) return &r;
    return nullptr;
  }

  RobotState* find(Team t, int id) {
    for (auto& r : robots)
      if (r.team == t && r.id == id) return &r;
    return nullptr;
  }
};

struct FieldGeometry {
  double length = 9.0;
  double width = 6.0;
  double penalty_depth = 1.0;
  double penalty_width = 2.0;
  double goal_width = 1.0;
  double boundary_margin = 0.3;

  /// Our goal sits on x = -length/2, theirs on x = +length/2.
  Vec2 goal_center(Team side) const {
    return {side == Team::Ours ? -length / 2.0 : length / 2.0, 0.0};
  }

  bool valid() const {
    return length > 0 && width > 0 && penalty_depth > 0 && penalty_width > 0 && goal_width > 0 &&
           boundary_margin > 0 && penalty_width < width && goal_width < penalty_width &&
           penalty_depth < length / 2.0;
  }

  /// Clamp a point into the playing area grown by boundary_margin.
  Vec2 clamp_to_bounds(Vec2 p, double inset = 0.0) const {
    const double hx = length / 2.0 + boundary_margin - inset;
    const double hy = width / 2.0 + boundary_margin - inset;
    return {std::clamp(p.x, -hx, hx), std::clamp(p.y, -hy, hy)};
  }

  bool inside_bounds(Vec2 p, double tol = 1e-9) const {
    return std::abs(p.x) <= length / 2.0 + boundary_margin + tol &&
           std::abs(p.y) <= width / 2.0 + boundary_margin + tol;
  }
};

/// Inside the penalty rectangle adjoining `side`'s goal line. The goal line
/// edge is closed; the two edges facing the field are open, so a point lying
/// exactly on the field-facing perimeter is outside.
inline bool in_penalty_area(Vec2 p, Team side, const FieldGeometry& geo) {
  const double half_len = geo.length / 2.0;
  // distance in from the goal line, measured toward the field
  const double depth = side == Team::Ours ? p.x + half_len : half_len - p.x;
  return depth >= 0.0 && depth < geo.penalty_depth && std::abs(p.y) < geo.penalty_width / 2.0;
}

/// Omni-drive geometry. Defaults follow the 55 mm wheel and 1557 rpm tire limit.
struct RobotParams {
  double wheel_radius = 0.0275;
  std::array<double, 4> wheel_azimuths{kPi / 4.0, 3.0 * kPi / 4.0, 5.0 * kPi / 4.0, 7.0 * kPi / 4.0};
  double wheel_offset_radius = 0.08;
  double max_wheel_rpm = 1557.0;
  double robot_radius = 0.09;
  double com_height = 0.0397;  // informational only

  double max_wheel_omega() const { return max_wheel_rpm * kTwoPi / 60.0; }

  bool valid() const {
    if (!(wheel_radius > 0 && max_wheel_rpm > 0 && robot_radius > 0 && wheel_offset_radius > 0))
      return false;
    for (std::size_t i = 0; i < wheel_azimuths.size(); ++i)
      for (std::size_t j = i + 1; j < wheel_azimuths.size(); ++j)
        if (std::abs(wrap_angle(wheel_azimuths[i] - wheel_azimuths[j])) < 1e-6) return false;
    return true;
  }
};

enum class GamePhase : std::uint8_t { Halt, Stop, PrepareKickoffUs, PrepareKickoffThem, Run };

enum class RefereeCommand : std::uint8_t {
  Halt,
  Stop,
  ForceStart,
  NormalStart,
  PrepareKickoffUs,
  PrepareKickoffThem
};

inline constexpr std::array kAllPhases{GamePhase::Halt, GamePhase::Stop, GamePhase::PrepareKickoffUs,
                                       GamePhase::PrepareKickoffThem, GamePhase::Run};
inline constexpr std::array kAllRefereeCommands{
    RefereeCommand::Halt,        RefereeCommand::Stop,           RefereeCommand::ForceStart,
    RefereeCommand::NormalStart, RefereeCommand::PrepareKickoffUs, RefereeCommand::PrepareKickoffThem};

inline std::string_view to_string(GamePhase p) {
  switch (p) {
    case GamePhase::Halt: return "HALT";
    case GamePhase::Stop: return "STOP";
    case GamePhase::PrepareKickoffUs: return "PREPARE_KICKOFF_US";
    case GamePhase::PrepareKickoffThem: return "PREPARE_KICKOFF_THEM";
    case GamePhase::Run: return "RUN";
  }
  return "?";
}

inline std::optional<GamePhase> phase_from_string(std::string_view s) {
  for (auto p : kAllPhases)
    if (to_string(p) == s) return p;
  return std::nullopt;
}

inline std::string_view to_string(RefereeCommand c) {
  switch (c) {
    case RefereeCommand::Halt: return "HALT";
    case RefereeCommand::Stop: return "STOP";
    case RefereeCommand::ForceStart: return "FORCE_START";
    case RefereeCommand::NormalStart: return "NORMAL_START";
    case RefereeCommand::PrepareKickoffUs: return "PREPARE_KICKOFF_US";
    case RefereeCommand::PrepareKickoffThem: return "PREPARE_KICKOFF_THEM";
  }
  return "?";
}

inline std::optional<RefereeCommand> referee_command_from_string(std::string_view s) {
  for (auto c : kAllRefereeCommands)
    if (to_string(c) == s) return c;
  return std::nullopt;
}

/// Referee state machine. HALT and STOP are reachable from every phase;
/// everything else only moves along STOP -> PREPARE_* -> RUN or STOP -> RUN.
inline GamePhase update_phase(GamePhase phase, RefereeCommand cmd) {
  switch (cmd) {
    case RefereeCommand::Halt: return GamePhase::Halt;
    case RefereeCommand::Stop: return GamePhase::Stop;
    case RefereeCommand::PrepareKickoffUs:
      return phase == GamePhase::Stop ? GamePhase::PrepareKickoffUs : phase;
    case RefereeCommand::PrepareKickoffThem:
      return phase == GamePhase::Stop ? GamePhase::PrepareKickoffThem : phase;
    case RefereeCommand::NormalStart:
      return (phase == GamePhase::PrepareKickoffUs || phase == GamePhase::PrepareKickoffThem)
                 ? GamePhase::Run
                 : phase;
    case RefereeCommand::ForceStart:
      return phase == GamePhase::Stop ? GamePhase::Run : phase;
  }
  return phase;
}

}  // namespace sslai
