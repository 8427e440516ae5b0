#pragma once

// Recursive perpendicular-detour planner. Obstacles are discs, treated as
// static for the frame being planned; the robot follows the first waypoint
// and replans every frame.

#include <span>
#include <stdexcept>
#include <vector>

#include "sslai/world_model.hpp"

namespace sslai {

struct Obstacle {
  Vec2 center;
  double radius = 0.0;
};

struct PathPolyline {
  std::vector<Vec2> waypoints;

  double length() const {
    double s = 0.0;
    for (std::size_t i = 1; i < waypoints.size(); ++i) s += distance(waypoints[i - 1], waypoints[i]);
    return s;
  }
  Vec2 start() const { return waypoints.front(); }
  Vec2 goal() const { return waypoints.back(); }
};

class PathBlocked : public std::runtime_error {
 public:
  PathBlocked() : std::runtime_error("path blocked") {}
};

struct PlannerOptions {
  double margin = 0.05;
  int max_depth = 6;
  /// Detours pick the perpendicular side closer to this point.
  Vec2 field_center{};
};

namespace detail {

inline void plan_segment(Vec2 a, Vec2 b, std::span<const Obstacle> obstacles, const PlannerOptions& opt,
                         int depth, std::vector<Vec2>& out) {
  // find the obstacle that penetrates the segment deepest
  const Obstacle* worst = nullptr;
  double worst_violation = 0.0;
  for (const auto& o : obstacles) {
    const double inflated = o.radius + opt.margin;
    const double violation = inflated - point_segment_distance(o.center, a, b);
    if (violation > 0.0 && violation > worst_violation) {
      worst_violation = violation;
      worst = &o;
    }
  }
  if (worst == nullptr) {
    out.push_back(b);
    return;
  }
  if (depth <= 0) throw PathBlocked();

  Vec2 normal = (b - a).perp().normalized();
  if (normal == Vec2{}) throw PathBlocked();
  const double offset = worst->radius + 2.0 * opt.margin;
  const Vec2 left = worst->center + normal * offset;
  const Vec2 right = worst->center - normal * offset;
  // ties go to the left (counter-clockwise) side
  const Vec2 via = distance(right, opt.field_center) < distance(left, opt.field_center) ? right : left;
  if (via == a || via == b) throw PathBlocked();

  plan_segment(a, via, obstacles, opt, depth - 1, out);
  plan_segment(via, b, obstacles, opt, depth - 1, out);
}

}  // namespace detail

/// Returns a polyline from start to goal whose every segment keeps at least
/// radius + margin from each obstacle centre. Throws PathBlocked when the
/// detour recursion runs out of depth. start == goal yields the degenerate
/// two-point path [start, start].
inline PathPolyline plan_path(Vec2 start, Vec2 goal, std::span<const Obstacle> obstacles,
                              const PlannerOptions& opt) {
  if (opt.max_depth < 1) throw std::invalid_argument("plan_path: max_depth must be >= 1");
  PathPolyline path;
  path.waypoints.push_back(start);
  if (start == goal) {
    path.waypoints.push_back(goal);
    return path;
  }
  detail::plan_segment(start, goal, obstacles, opt, opt.max_depth, path.waypoints);
  return path;
}

}  // namespace sslai
