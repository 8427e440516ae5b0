#pragma once

// Strategy block: pick the role combination for the match situation, hand
// roles to robots by priority, and run each role's skill to get a motion
// target for the control block.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sslai/pass_potential.hpp"
#include "sslai/targets.hpp"
#include "sslai/world_model.hpp"

namespace sslai {

enum class RoleKind : std::uint8_t { Goalie, Attacker, Defender, PassReceiver, PassInterrupter, Waiter };

inline constexpr std::array kAllRoleKinds{RoleKind::Goalie,       RoleKind::Attacker,        RoleKind::Defender,
                                          RoleKind::PassReceiver, RoleKind::PassInterrupter, RoleKind::Waiter};

inline std::string_view to_string(RoleKind k) {
  switch (k) {
    case RoleKind::Goalie: return "Goalie";
    case RoleKind::Attacker: return "Attacker";
    case RoleKind::Defender: return "Defender";
    case RoleKind::PassReceiver: return "PassReceiver";
    case RoleKind::PassInterrupter: return "PassInterrupter";
    case RoleKind::Waiter: return "Waiter";
  }
  return "?";
}

/// Accepts the full name or the short policy-table code (G, A, D, PR, PI, W).
inline std::optional<RoleKind> role_from_string(std::string_view s) {
  for (auto k : kAllRoleKinds)
    if (to_string(k) == s) return k;
  if (s == "G") return RoleKind::Goalie;
  if (s == "A") return RoleKind::Attacker;
  if (s == "D") return RoleKind::Defender;
  if (s == "PR") return RoleKind::PassReceiver;
  if (s == "PI") return RoleKind::PassInterrupter;
  if (s == "W") return RoleKind::Waiter;
  return std::nullopt;
}

/// Priority band of a role kind; lower is more important.
inline int role_rank(RoleKind k) {
  switch (k) {
    case RoleKind::Goalie: return 0;
    case RoleKind::Attacker: return 1;
    case RoleKind::Defender: return 2;
    case RoleKind::PassReceiver:
    case RoleKind::PassInterrupter: return 3;
    case RoleKind::Waiter: return 4;
  }
  return 5;
}

struct RoleRequest {
  RoleKind kind = RoleKind::Waiter;
  int priority = 0;
  int slot = 0;

  bool operator==(const RoleRequest&) const = default;
};

struct RoleSlot {
  RoleKind kind = RoleKind::Waiter;
  int slot = 0;

  bool operator==(const RoleSlot&) const = default;
};

struct RoleAssignment {
  std::map<int, RoleSlot> roles;  // robot id -> role

  std::size_t count(RoleKind k) const {
    return static_cast<std::size_t>(
        std::count_if(roles.begin(), roles.end(), [k](const auto& e) { return e.second.kind == k; }));
  }
  std::optional<int> robot_for(RoleKind k, int slot = 0) const {
    for (const auto& [id, r] : roles)
      if (r.kind == k && r.slot == slot) return id;
    return std::nullopt;
  }
  bool operator==(const RoleAssignment&) const = default;
};

/// Role-count tables for the two possession states. Robots beyond a table's
/// length become Waiters; fewer robots drop entries from the tail.
struct RolePolicy {
  std::vector<RoleKind> attacking{RoleKind::Goalie,   RoleKind::Attacker,     RoleKind::Defender,
                                  RoleKind::Defender, RoleKind::PassReceiver, RoleKind::PassReceiver};
  std::vector<RoleKind> defending{RoleKind::Goalie,   RoleKind::Attacker,        RoleKind::Defender,
                                  RoleKind::Defender, RoleKind::PassInterrupter, RoleKind::PassInterrupter};

  static void validate_table(const std::vector<RoleKind>& table) {
    if (table.empty() || table.front() != RoleKind::Goalie)
      throw std::invalid_argument("role policy: table must start with Goalie");
    if (std::count(table.begin(), table.end(), RoleKind::Goalie) != 1)
      throw std::invalid_argument("role policy: exactly one Goalie per table");
    if (std::count(table.begin(), table.end(), RoleKind::Attacker) > 1)
      throw std::invalid_argument("role policy: at most one Attacker per table");
  }
};

inline Vec2 our_goal(const FieldGeometry& geo) { return geo.goal_center(Team::Ours); }
inline Vec2 their_goal(const FieldGeometry& geo) { return geo.goal_center(Team::Theirs); }

/// We possess when one of ours touches the ball, or when the robot nearest
/// the ball is ours.
inline bool we_possess(const WorldFrame& world) {
  const RobotState* nearest = nullptr;
  double best = 0.0;
  for (const auto& r : world.robots) {
    if (r.team == Team::Ours && r.ball_contact) return true;
    const double d = (r.pose.position - world.ball.position).norm2();
    if (nearest == nullptr || d < best || (d == best && r.team == Team::Ours && nearest->team != Team::Ours)) {
      nearest = &r;
      best = d;
    }
  }
  return nearest != nullptr && nearest->team == Team::Ours;
}

inline std::vector<RoleRequest> select_role_set(const WorldFrame& world, GamePhase phase, std::size_t n_robots,
                                                const RolePolicy& policy = {}) {
  bool attacking = we_possess(world);
  if (phase == GamePhase::PrepareKickoffUs) attacking = true;
  if (phase == GamePhase::PrepareKickoffThem) attacking = false;

  std::vector<RoleKind> kinds = attacking ? policy.attacking : policy.defending;
  RolePolicy::validate_table(kinds);
  if (kinds.size() > n_robots) kinds.resize(n_robots);
  while (kinds.size() < n_robots) kinds.push_back(RoleKind::Waiter);
  std::stable_sort(kinds.begin(), kinds.end(), [](RoleKind a, RoleKind b) { return role_rank(a) < role_rank(b); });

  std::vector<RoleRequest> out;
  out.reserve(kinds.size());
  std::map<RoleKind, int> slots;
  for (std::size_t i = 0; i < kinds.size(); ++i)
    out.push_back({kinds[i], static_cast<int>(i), slots[kinds[i]]++});
  return out;
}

struct Candidate {
  int id = 0;
  Vec2 position;
};

/// Greedy assignment in ascending priority: each request takes the free
/// robot nearest its anchor; equal distances go to the lower id.
/// `anchors[i]` belongs to `requests[i]`.
inline RoleAssignment assign_roles(std::span<const RoleRequest> requests, std::span<const Vec2> anchors,
                                   std::span<const Candidate> robots) {
  if (requests.size() != anchors.size()) throw std::invalid_argument("assign_roles: one anchor per request");
  if (requests.size() != robots.size()) throw std::invalid_argument("assign_roles: one request per robot");
  std::vector<std::size_t> order(requests.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return requests[a].priority < requests[b].priority; });

  RoleAssignment out;
  std::vector<bool> taken(robots.size(), false);
  for (std::size_t ri : order) {
    std::size_t pick = robots.size();
    double pick_cost = 0.0;
    for (std::size_t c = 0; c < robots.size(); ++c) {
      if (taken[c]) continue;
      const double cost = (robots[c].position - anchors[ri]).norm2();
      if (pick == robots.size() || cost < pick_cost || (cost == pick_cost && robots[c].id < robots[pick].id)) {
        pick = c;
        pick_cost = cost;
      }
    }
    taken[pick] = true;
    out.roles[robots[pick].id] = {requests[ri].kind, requests[ri].slot};
  }
  return out;
}

struct PotentialSettings {
  double cell_size = 0.1;
  double shadow_weight = 2.0;
  double gradient_weight = 1.0;
  double crowd_weight = 0.5;
  double crowd_falloff = 1.0;
  double receiver_separation = 1.0;
  double min_pass_distance = 1.0;
  double max_pass_distance = 3.5;
  double edge_margin = 0.3;  // pass spots keep this far inside the touch and goal lines
};

struct SkillSettings {
  double defender_spacing = 0.25;
  double defender_standoff = 0.005;  // outward offset from the penalty perimeter
  double hold_distance = 0.09;       // ball distance ahead of a robot that holds it
  double dribble_radius = 0.5;
  double aim_tolerance = 0.08;
  double shot_range = 4.0;
  double pass_arrive_speed = 2.0;
  double ball_decel = 0.5;
  double kick_speed_max = 6.5;
  double stop_ball_clearance = 0.5;
  double center_circle_radius = 0.5;
  double kickoff_standoff = 0.1;
};

struct StrategySettings {
  FieldGeometry field;
  RobotParams robot;
  RolePolicy policy;
  PotentialSettings potential;
  SkillSettings skills;
};

inline double shadow_block_radius(const RobotParams& params) { return params.robot_radius + kBallRadius; }

/// Pass potential for `world`: shadow from the ball with opponents as
/// occluders, a ramp toward their goal, and opponent crowding.
inline PotentialGrid build_pass_grid(const WorldFrame& world, const StrategySettings& s) {
  const GridShape shape = GridShape::covering(s.field, s.potential.cell_size);
  std::vector<Vec2> opponents;
  for (const auto& r : world.robots)
    if (r.team == Team::Theirs) opponents.push_back(r.pose.position);
  const ScoreGrid shadow = shadow_mask(shape, world.ball.position, opponents, shadow_block_radius(s.robot));
  const ScoreGrid ramp = gradient_mask(shape, 0.0, 1.0, {1.0, 0.0});
  const ScoreGrid crowd = crowd_mask(shape, opponents, s.potential.crowd_falloff);
  const WeightedMask masks[] = {{&shadow, s.potential.shadow_weight},
                                {&ramp, s.potential.gradient_weight},
                                {&crowd, s.potential.crowd_weight}};
  return combine_masks(masks);
}

/// Arc-length parametrised perimeter of our penalty area: from the goal-line
/// corner at y = -w/2, along that side, across the front edge, and back
/// down the other side.
struct PenaltyPerimeter {
  double goal_x;
  double depth;
  double half_width;

  explicit PenaltyPerimeter(const FieldGeometry& geo)
      : goal_x(-geo.length / 2.0), depth(geo.penalty_depth), half_width(geo.penalty_width / 2.0) {}

  double total() const { return 2.0 * depth + 2.0 * half_width; }

  Vec2 point(double s) const {
    s = std::clamp(s, 0.0, total());
    if (s <= depth) return {goal_x + s, -half_width};
    s -= depth;
    if (s <= 2.0 * half_width) return {goal_x + depth, -half_width + s};
    s -= 2.0 * half_width;
    return {goal_x + depth - s, half_width};
  }

  /// Outward unit normal at arc length s.
  Vec2 normal(double s) const {
    s = std::clamp(s, 0.0, total());
    if (s < depth) return {0.0, -1.0};
    if (s <= depth + 2.0 * half_width) return {1.0, 0.0};
    return {0.0, 1.0};
  }

  /// Where the ray from the goal centre toward `toward` leaves the area.
  double exit_arc(Vec2 toward) const {
    Vec2 d = toward - Vec2{goal_x, 0.0};
    if (d.x <= 1e-6) d.x = 1e-6;  // behind the goal line: push onto the field side
    const double t_front = depth / d.x;
    const double t_side = d.y != 0.0 ? half_width / std::abs(d.y) : std::numeric_limits<double>::infinity();
    if (t_front <= t_side) {
      const double y = d.y * t_front;
      return depth + (y + half_width);
    }
    const double x = d.x * t_side;
    return d.y < 0.0 ? x : total() - x;
  }
};

/// Per-tick context shared by every role's skill.
struct StrategyContext {
  const WorldFrame* world = nullptr;
  GamePhase phase = GamePhase::Halt;
  const StrategySettings* settings = nullptr;
  const PotentialGrid* pass_grid = nullptr;
  std::vector<Vec2> receiver_spots;     // k-th best pass cells
  std::vector<const RobotState*> marks; // opponents ordered by distance to our goal
  std::size_t defender_count = 0;
  std::optional<ScoreGrid> waiter_grid; // built after assignment
};

class MissingPassGrid : public std::logic_error {
 public:
  MissingPassGrid() : std::logic_error("role needs a pass grid") {}
};

/// The pass grid with cells out of kicking reach or hugging the field
/// edge pushed to -inf, so they rank last.
inline PotentialGrid reachable_spots(const PotentialGrid& grid, Vec2 ball, const StrategySettings& s) {
  PotentialGrid out = grid;
  const double hx = s.field.length / 2.0 - s.potential.edge_margin;
  const double hy = s.field.width / 2.0 - s.potential.edge_margin;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const Vec2 c = out.cell_center(i);
    if (distance(c, ball) > s.potential.max_pass_distance || std::abs(c.x) > hx || std::abs(c.y) > hy)
      out[i] = -std::numeric_limits<double>::infinity();
  }
  return out;
}

/// Fills the ranked spots and marks that the anchors and skills read.
inline StrategyContext make_context(const WorldFrame& world, GamePhase phase, const StrategySettings& settings,
                                    const PotentialGrid* pass_grid, std::span<const RoleRequest> requests) {
  StrategyContext ctx;
  ctx.world = &world;
  ctx.phase = phase;
  ctx.settings = &settings;
  ctx.pass_grid = pass_grid;

  std::size_t receivers = 0;
  for (const auto& r : requests) {
    if (r.kind == RoleKind::PassReceiver) ++receivers;
    if (r.kind == RoleKind::Defender) ++ctx.defender_count;
  }
  if (pass_grid != nullptr) {
    std::vector<Exclusion> excl{{world.ball.position, settings.potential.min_pass_distance}};
    ctx.receiver_spots = ranked_cells(reachable_spots(*pass_grid, world.ball.position, settings), std::move(excl),
                                      settings.field, std::max<std::size_t>(receivers, 1),
                                      settings.potential.receiver_separation);
  }
  const Vec2 goal = our_goal(settings.field);
  for (const auto& r : world.robots)
    if (r.team == Team::Theirs) ctx.marks.push_back(&r);
  std::stable_sort(ctx.marks.begin(), ctx.marks.end(), [&](const RobotState* a, const RobotState* b) {
    const double da = (a->pose.position - goal).norm2();
    const double db = (b->pose.position - goal).norm2();
    return da < db || (da == db && a->id < b->id);
  });
  return ctx;
}

inline Vec2 defender_point(const StrategyContext& ctx, int slot) {
  const auto& s = *ctx.settings;
  const PenaltyPerimeter perim(s.field);
  const double center = perim.exit_arc(ctx.world->ball.position);
  const double n = static_cast<double>(std::max<std::size_t>(ctx.defender_count, 1));
  const double arc = std::clamp(center + (slot - (n - 1.0) / 2.0) * s.skills.defender_spacing, 0.0, perim.total());
  return perim.point(arc) + perim.normal(arc) * s.skills.defender_standoff;
}

inline Vec2 waiter_anchor(const StrategyContext& ctx) {
  const double quarter = ctx.settings->field.length / 4.0;
  return {ctx.world->ball.position.x >= 0.0 ? -quarter : quarter, 0.0};
}

inline Vec2 interrupt_point(const StrategyContext& ctx, int slot) {
  const Vec2 ball = ctx.world->ball.position;
  if (slot >= 0 && static_cast<std::size_t>(slot) < ctx.marks.size())
    return (ctx.marks[static_cast<std::size_t>(slot)]->pose.position + ball) / 2.0;
  return (our_goal(ctx.settings->field) + ball) / 2.0;
}

inline Vec2 receiver_spot(const StrategyContext& ctx, int slot) {
  if (ctx.receiver_spots.empty()) throw MissingPassGrid();
  const auto k = std::min<std::size_t>(static_cast<std::size_t>(std::max(slot, 0)), ctx.receiver_spots.size() - 1);
  return ctx.receiver_spots[k];
}

inline Vec2 role_anchor(const RoleRequest& req, const StrategyContext& ctx) {
  switch (req.kind) {
    case RoleKind::Goalie: return our_goal(ctx.settings->field);
    case RoleKind::Attacker: return ctx.world->ball.position;
    case RoleKind::Defender: return defender_point(ctx, req.slot);
    case RoleKind::PassReceiver:
      return ctx.receiver_spots.empty() ? ctx.world->ball.position : receiver_spot(ctx, req.slot);
    case RoleKind::PassInterrupter:
      if (static_cast<std::size_t>(req.slot) < ctx.marks.size())
        return ctx.marks[static_cast<std::size_t>(req.slot)]->pose.position;
      return interrupt_point(ctx, req.slot);
    case RoleKind::Waiter: return waiter_anchor(ctx);
  }
  return {};
}

/// Assigns `requests` to our robots in `world` using the role anchors.
inline RoleAssignment assign_roles(std::span<const RoleRequest> requests, const WorldFrame& world,
                                   const StrategyContext& ctx) {
  std::vector<Candidate> robots;
  for (const auto& r : world.robots)
    if (r.team == Team::Ours) robots.push_back({r.id, r.pose.position});
  std::vector<Vec2> anchors;
  anchors.reserve(requests.size());
  for (const auto& req : requests) anchors.push_back(role_anchor(req, ctx));
  return assign_roles(requests, anchors, robots);
}

/// Lowest-crowding grid over every robot except the Waiters themselves.
inline ScoreGrid build_waiter_grid(const WorldFrame& world, const RoleAssignment& assignment,
                                   const StrategySettings& s) {
  std::vector<Vec2> crowd;
  for (const auto& r : world.robots) {
    if (r.team == Team::Ours) {
      auto it = assignment.roles.find(r.id);
      if (it != assignment.roles.end() && it->second.kind == RoleKind::Waiter) continue;
    }
    crowd.push_back(r.pose.position);
  }
  crowd.push_back(world.ball.position);
  return crowd_mask(GridShape::covering(s.field, s.potential.cell_size), crowd, s.potential.crowd_falloff);
}

/// No opposing robot disc (robot + ball radius) crosses the segment from→to.
inline bool lane_clear(const WorldFrame& world, Vec2 from, Vec2 to, const RobotParams& params, Team blockers,
                       int ignore_id = -1) {
  const double r = params.robot_radius + kBallRadius;
  for (const auto& o : world.robots) {
    if (o.team != blockers || o.id == ignore_id) continue;
    if (point_segment_distance(o.pose.position, from, to) < r) return false;
  }
  return true;
}

inline bool clear_shot(const WorldFrame& world, const FieldGeometry& geo, const RobotParams& params) {
  return lane_clear(world, world.ball.position, their_goal(geo), params, Team::Theirs);
}

/// Kick power for a ball that should still be rolling at `arrive_speed`
/// after `dist` metres of constant friction deceleration.
inline int pass_power(double dist, const SkillSettings& k) {
  const double v0 = std::sqrt(k.pass_arrive_speed * k.pass_arrive_speed + 2.0 * k.ball_decel * dist);
  return std::clamp(static_cast<int>(std::ceil(100.0 * v0 / k.kick_speed_max)), 1, 100);
}

namespace skills {

inline double face(Vec2 from, Vec2 to, double fallback) {
  const Vec2 d = to - from;
  return d.norm2() > 0.0 ? d.angle() : fallback;
}

/// Goalie stands on the goal mouth: on the bisector of the angle the ball
/// sees between the posts, or on the ball's path when a shot is incoming.
inline MotionTarget goalie(const RobotState& robot, const StrategyContext& ctx) {
  const auto& s = *ctx.settings;
  const Vec2 ball = ctx.world->ball.position;
  const Vec2 vel = ctx.world->ball.velocity;
  const double gx = -s.field.length / 2.0;
  const double half_mouth = s.field.goal_width / 2.0;
  const Vec2 post_lo{gx, -half_mouth};
  const Vec2 post_hi{gx, half_mouth};

  double y;
  const double d_lo = distance(ball, post_lo);
  const double d_hi = distance(ball, post_hi);
  // angle bisector theorem: the bisector splits the mouth in the ratio of the post distances
  y = (d_lo + d_hi) > 0.0 ? -half_mouth + s.field.goal_width * d_lo / (d_lo + d_hi) : 0.0;
  if (vel.x < -0.5) {
    const double t = (gx - ball.x) / vel.x;
    const double y_hit = ball.y + vel.y * t;
    if (std::abs(y_hit) <= half_mouth + s.robot.robot_radius) y = y_hit;
  }
  y = std::clamp(y, -half_mouth, half_mouth);

  MotionTarget t;
  const Vec2 spot{gx, y};
  t.target = Pose(spot, face(spot, ball, 0.0));
  if (robot.ball_contact) {
    // clear upfield
    t.target = Pose(robot.pose.position, 0.0);
    t.dribble_power = 100;
    if (std::abs(wrap_angle(robot.pose.yaw)) < s.skills.aim_tolerance * 3.0) {
      t.kick_power = 100;
      t.dribble_power = 0;
    }
  } else if (distance(robot.pose.position, ball) < s.skills.dribble_radius) {
    t.dribble_power = 100;
  }
  return t;
}

/// The teammate with the best pass score at its own position among those in
/// passing range with an open lane from the ball.
inline const RobotState* ready_receiver(const RobotState& passer, const StrategyContext& ctx) {
  const auto& s = *ctx.settings;
  const Vec2 ball = ctx.world->ball.position;
  const RobotState* pick = nullptr;
  double best = 0.0;
  for (const auto& r : ctx.world->robots) {
    if (r.team != Team::Ours || r.id == passer.id) continue;
    const double d = distance(r.pose.position, ball);
    if (d < s.potential.min_pass_distance || d > s.potential.max_pass_distance) continue;
    if (in_penalty_area(r.pose.position, Team::Ours, s.field)) continue;
    if (!lane_clear(*ctx.world, ball, r.pose.position, s.robot, Team::Theirs)) continue;
    double score = r.pose.position.x;
    if (ctx.pass_grid != nullptr) {
      const GridShape& g = ctx.pass_grid->shape();
      const Vec2 rel = (r.pose.position - g.origin) / g.cell_size;
      const int col = std::clamp(static_cast<int>(rel.x), 0, static_cast<int>(g.cols) - 1);
      const int row = std::clamp(static_cast<int>(rel.y), 0, static_cast<int>(g.rows) - 1);
      score = ctx.pass_grid->at(static_cast<std::size_t>(col), static_cast<std::size_t>(row));
    }
    if (pick == nullptr || score > best) {
      pick = &r;
      best = score;
    }
  }
  return pick;
}

/// Approach the ball; with the ball, shoot when the goal is open, otherwise
/// pass to the best occupied pass spot, otherwise carry toward their goal.
inline MotionTarget attacker(const RobotState& robot, const StrategyContext& ctx) {
  const auto& s = *ctx.settings;
  const auto& k = s.skills;
  const Vec2 ball = ctx.world->ball.position;
  const Vec2 goal = their_goal(s.field);
  const bool shot = distance(ball, goal) < k.shot_range && clear_shot(*ctx.world, s.field, s.robot);
  const RobotState* receiver = shot ? nullptr : ready_receiver(robot, ctx);
  const Vec2 aim = receiver != nullptr ? receiver->pose.position : goal;

  MotionTarget t;
  if (!robot.ball_contact) {
    const Vec2 dir = (aim - ball).normalized();
    const Vec2 behind = ball - (dir == Vec2{} ? Vec2{1.0, 0.0} : dir) * k.hold_distance;
    t.target = Pose(behind, face(behind, ball, robot.pose.yaw));
    if (distance(robot.pose.position, ball) < k.dribble_radius) t.dribble_power = 100;
    return t;
  }

  const double heading = face(robot.pose.position, aim, robot.pose.yaw);
  const bool aligned = std::abs(wrap_angle(heading - robot.pose.yaw)) < k.aim_tolerance;
  t.dribble_power = 100;
  if (shot) {
    t.target = Pose(robot.pose.position, heading);
    if (aligned) t.kick_power = 100;
  } else if (receiver != nullptr) {
    t.target = Pose(robot.pose.position, heading);
    if (aligned) t.kick_power = pass_power(distance(ball, receiver->pose.position), k);
  } else {
    // carry the ball a step toward their goal while turning
    const Vec2 step = robot.pose.position + (aim - robot.pose.position).normalized() * 0.3;
    t.target = Pose(step, heading);
  }
  if (t.kick_power > 0) t.dribble_power = 0;
  return t;
}

inline MotionTarget defender(const RobotState& robot, int slot, const StrategyContext& ctx) {
  const Vec2 p = defender_point(ctx, slot);
  MotionTarget t;
  t.target = Pose(p, face(p, ctx.world->ball.position, robot.pose.yaw));
  if (distance(robot.pose.position, ctx.world->ball.position) < ctx.settings->skills.dribble_radius)
    t.dribble_power = 100;
  return t;
}

/// Wait on the k-th pass spot facing the ball; step onto the ball's line
/// when a pass is on its way.
inline MotionTarget pass_receiver(const RobotState& robot, int slot, const StrategyContext& ctx) {
  const Vec2 ball = ctx.world->ball.position;
  const Vec2 vel = ctx.world->ball.velocity;
  Vec2 spot = receiver_spot(ctx, slot);
  const double speed = vel.norm();
  if (speed > 0.5 && (robot.pose.position - ball).dot(vel) > 0.0) {
    const Vec2 u = vel / speed;
    const Vec2 foot = ball + u * (robot.pose.position - ball).dot(u);
    if (distance(foot, robot.pose.position) < 1.0) spot = foot;
  }
  MotionTarget t;
  t.target = Pose(spot, face(spot, ball, robot.pose.yaw));
  t.dribble_power = 100;
  return t;
}

inline MotionTarget pass_interrupter(const RobotState& robot, int slot, const StrategyContext& ctx) {
  const Vec2 p = interrupt_point(ctx, slot);
  MotionTarget t;
  t.target = Pose(p, face(p, ctx.world->ball.position, robot.pose.yaw));
  t.dribble_power = 100;
  return t;
}

inline MotionTarget waiter(const RobotState& robot, int slot, const StrategyContext& ctx) {
  Vec2 p = waiter_anchor(ctx);
  if (ctx.waiter_grid) {
    const auto spots = ranked_cells(*ctx.waiter_grid, {}, ctx.settings->field,
                                    static_cast<std::size_t>(slot) + 1, ctx.settings->potential.receiver_separation);
    if (!spots.empty()) p = spots[std::min<std::size_t>(static_cast<std::size_t>(slot), spots.size() - 1)];
  }
  MotionTarget t;
  t.target = Pose(p, face(p, ctx.world->ball.position, robot.pose.yaw));
  return t;
}

}  // namespace skills

/// Phase rules applied on top of every skill: no kicks outside RUN, keep
/// clear of the ball in STOP, stay in our half and out of the centre
/// circle while preparing a kickoff, and stay inside the field bounds.
inline MotionTarget apply_phase_rules(MotionTarget t, RoleKind kind, const StrategyContext& ctx) {
  const auto& s = *ctx.settings;
  const Vec2 ball = ctx.world->ball.position;
  Vec2 p = t.target.position;
  switch (ctx.phase) {
    case GamePhase::Run:
    case GamePhase::Halt:
      break;
    case GamePhase::Stop: {
      t.kick_power = 0;
      t.urgency = Urgency::StopPhase;
      const double keep = s.skills.stop_ball_clearance + s.robot.robot_radius;
      const Vec2 d = p - ball;
      if (d.norm() < keep) p = ball + (d.norm2() > 0.0 ? d.normalized() : Vec2{-1.0, 0.0}) * keep;
      break;
    }
    case GamePhase::PrepareKickoffUs:
    case GamePhase::PrepareKickoffThem: {
      t.kick_power = 0;
      t.dribble_power = 0;
      const bool kicker = kind == RoleKind::Attacker && ctx.phase == GamePhase::PrepareKickoffUs;
      if (kicker) {
        // line up behind the ball without touching it
        const double keep = s.robot.robot_radius + s.skills.kickoff_standoff;
        const Vec2 d = p - ball;
        if (d.norm() < keep) p = ball + (d.norm2() > 0.0 ? d.normalized() : Vec2{-1.0, 0.0}) * keep;
      } else {
        p.x = std::min(p.x, -s.robot.robot_radius);
        const double keep = s.skills.center_circle_radius + s.robot.robot_radius;
        if (p.norm() < keep) p = (p.norm2() > 0.0 ? p.normalized() : Vec2{-1.0, 0.0}) * keep;
        p.x = std::min(p.x, -s.robot.robot_radius);
      }
      break;
    }
  }
  t.target = Pose(s.field.clamp_to_bounds(p, s.robot.robot_radius), t.target.yaw);
  t.kick_power = std::clamp(t.kick_power, 0, 100);
  t.dribble_power = std::clamp(t.dribble_power, 0, 100);
  return t;
}

/// Runs the skill for one robot's role. Throws MissingPassGrid when a
/// grid-dependent role is run without pass spots.
inline MotionTarget run_role(RoleKind kind, int slot, const RobotState& robot, const StrategyContext& ctx) {
  if (kind == RoleKind::PassReceiver && ctx.receiver_spots.empty()) throw MissingPassGrid();
  MotionTarget t;
  switch (kind) {
    case RoleKind::Goalie: t = skills::goalie(robot, ctx); break;
    case RoleKind::Attacker: t = skills::attacker(robot, ctx); break;
    case RoleKind::Defender: t = skills::defender(robot, slot, ctx); break;
    case RoleKind::PassReceiver: t = skills::pass_receiver(robot, slot, ctx); break;
    case RoleKind::PassInterrupter: t = skills::pass_interrupter(robot, slot, ctx); break;
    case RoleKind::Waiter: t = skills::waiter(robot, slot, ctx); break;
  }
  return apply_phase_rules(t, kind, ctx);
}

}  // namespace sslai
