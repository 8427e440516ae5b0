#pragma once

// Test-side reference computations. Nothing here calls the library code it
// is used to check; where a library type appears it is only as plain data.

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "sslai/world_model.hpp"

namespace oracle {

using sslai::Vec2;

inline double dist(Vec2 a, Vec2 b) { return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y)); }

// Shadow mask by sampling: `samples` evenly spaced points on ball->cell,
// endpoints included; a cell is dark when any point falls inside the disc of
// an obstacle that is nearer the ball than the cell.
inline bool sampled_dark(Vec2 ball, Vec2 cell, const std::vector<Vec2>& obstacles, double r, int samples = 200) {
  const double cell_d = dist(ball, cell);
  for (const Vec2& o : obstacles) {
    if (!(dist(o, ball) < cell_d)) continue;
    for (int k = 0; k < samples; ++k) {
      const double t = static_cast<double>(k) / (samples - 1);
      const Vec2 p{ball.x + (cell.x - ball.x) * t, ball.y + (cell.y - ball.y) * t};
      if (dist(p, o) < r) return true;
    }
  }
  return false;
}

// Closed-form distance from o to segment ab, written independently.
inline double seg_dist(Vec2 o, Vec2 a, Vec2 b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double l2 = dx * dx + dy * dy;
  if (l2 == 0.0) return dist(o, a);
  double t = ((o.x - a.x) * dx + (o.y - a.y) * dy) / l2;
  t = std::fmax(0.0, std::fmin(1.0, t));
  return dist(o, {a.x + t * dx, a.y + t * dy});
}

// True when the sampler can legitimately miss the disc: the segment enters
// it, but no sample lands inside because the chord is shorter than the
// sample spacing.
inline bool grazing(Vec2 ball, Vec2 cell, const std::vector<Vec2>& obstacles, double r, int samples = 200) {
  const double h = dist(ball, cell) / (samples - 1);
  for (const Vec2& o : obstacles) {
    if (!(dist(o, ball) < dist(ball, cell))) continue;
    const double d = seg_dist(o, ball, cell);
    if (d < r && d * d + h * h / 4.0 >= r * r - 1e-12) return true;
  }
  return false;
}

// Least-squares inverse of the omni-wheel map w = A x / r, A_i = (-sin phi,
// cos phi, R). Solves the 3x3 normal equations by Cramer's rule.
inline std::array<double, 3> wheel_lstsq(const std::array<double, 4>& w, const std::array<double, 4>& azimuths,
                                         double offset, double wheel_radius) {
  double ata[3][3] = {};
  double atb[3] = {};
  for (int i = 0; i < 4; ++i) {
    const double row[3] = {-std::sin(azimuths[i]), std::cos(azimuths[i]), offset};
    const double b = w[i] * wheel_radius;
    for (int p = 0; p < 3; ++p) {
      atb[p] += row[p] * b;
      for (int q = 0; q < 3; ++q) ata[p][q] += row[p] * row[q];
    }
  }
  auto det3 = [](const double m[3][3]) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  };
  const double d = det3(ata);
  std::array<double, 3> x{};
  for (int c = 0; c < 3; ++c) {
    double m[3][3];
    for (int p = 0; p < 3; ++p)
      for (int q = 0; q < 3; ++q) m[p][q] = q == c ? atb[p] : ata[p][q];
    x[static_cast<std::size_t>(c)] = det3(m) / d;
  }
  return x;
}

struct ProfileDraw {
  double a_max, v_max, v_cut, eps;
};

struct PointMassRun {
  bool arrived = false;
  double final_error = 0.0;
  double max_overshoot = 0.0;
  double max_speed = 0.0;
  double worst_rise = -1e9;       // largest v_k - v_{k-1} - a_max dt between nonzero commands
  bool floor_violated = false;    // nonzero command below v_cut, or zero outside eps
  int ticks = 0;
};

// Drives a 1-D point mass at the commanded speed toward `goal`, passing
// the remaining distance to `speed_fn(d, v_prev)`; reverses if it overshoots.
template <typename SpeedFn>
PointMassRun drive_point_mass(double goal, const ProfileDraw& p, double dt, SpeedFn speed_fn, int max_ticks = 200000) {
  PointMassRun out;
  double x = 0.0;
  double v_prev = 0.0;
  for (int k = 0; k < max_ticks; ++k) {
    const double d = std::abs(goal - x);
    const double v = speed_fn(d, v_prev);
    out.max_speed = std::fmax(out.max_speed, v);
    if (v > 0.0 && v_prev > 0.0) out.worst_rise = std::fmax(out.worst_rise, v - v_prev - p.a_max * dt);
    if ((v > 0.0 && v < p.v_cut) || (v == 0.0 && d >= p.eps)) out.floor_violated = true;
    if (v == 0.0) {
      out.arrived = true;
      out.final_error = d;
      out.ticks = k;
      return out;
    }
    const double dir = goal > x ? 1.0 : -1.0;
    const double before = (goal - x) * dir;
    x += dir * v * dt;
    const double after = (goal - x) * dir;
    if (after < 0.0 && before >= 0.0) out.max_overshoot = std::fmax(out.max_overshoot, -after);
    v_prev = v;
  }
  out.final_error = std::abs(goal - x);
  out.ticks = max_ticks;
  return out;
}

// Smallest clearance margin, sampled every `step` metres along the polyline:
// min over samples and obstacles of |p - c| - (radius + margin).
struct Disc {
  Vec2 c;
  double r;
};

inline double sampled_clearance(const std::vector<Vec2>& pts, const std::vector<Disc>& obstacles, double margin,
                                double step = 0.01) {
  double worst = 1e300;
  auto check = [&](Vec2 p) {
    for (const auto& o : obstacles) worst = std::fmin(worst, dist(p, o.c) - (o.r + margin));
  };
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double len = dist(pts[i], pts[i + 1]);
    const int n = std::max(1, static_cast<int>(std::ceil(len / step)));
    for (int k = 0; k <= n; ++k) {
      const double t = static_cast<double>(k) / n;
      check({pts[i].x + (pts[i + 1].x - pts[i].x) * t, pts[i].y + (pts[i + 1].y - pts[i].y) * t});
    }
  }
  if (pts.size() == 1) check(pts[0]);
  return worst;
}

// The referee transition table, written out cell by cell.
// Rows: HALT, STOP, PREPARE_KICKOFF_US, PREPARE_KICKOFF_THEM, RUN.
// Columns: HALT, STOP, FORCE_START, NORMAL_START, PREPARE_KICKOFF_US, PREPARE_KICKOFF_THEM.
inline sslai::GamePhase referee_table(sslai::GamePhase from, sslai::RefereeCommand cmd) {
  using P = sslai::GamePhase;
  static const P H = P::Halt, S = P::Stop, U = P::PrepareKickoffUs, T = P::PrepareKickoffThem, R = P::Run;
  static const P table[5][6] = {
      /* HALT */ {H, S, H, H, H, H},
      /* STOP */ {H, S, R, S, U, T},
      /* PKU  */ {H, S, U, R, U, U},
      /* PKT  */ {H, S, T, R, T, T},
      /* RUN  */ {H, S, R, R, R, R},
  };
  return table[static_cast<int>(from)][static_cast<int>(cmd)];
}

// Random world with `ours` and `theirs` robots, uniform over the field,
// no two robot centres closer than `min_sep`.
inline sslai::WorldFrame random_world(std::mt19937_64& rng, int ours, int theirs, double min_sep = 0.2,
                                      double length = 9.0, double width = 6.0) {
  std::uniform_real_distribution<double> ux(-length / 2.0, length / 2.0), uy(-width / 2.0, width / 2.0);
  std::uniform_real_distribution<double> yaw(-3.14159, 3.14159), vel(-1.0, 1.0);
  sslai::WorldFrame w;
  w.frame_id = rng() % 100000;
  w.ball.position = {ux(rng), uy(rng)};
  w.ball.velocity = {vel(rng), vel(rng)};
  auto place = [&]() {
    for (int attempt = 0; attempt < 1000; ++attempt) {
      const Vec2 p{ux(rng), uy(rng)};
      bool ok = true;
      for (const auto& r : w.robots) ok = ok && dist(r.pose.position, p) >= min_sep;
      if (ok) return p;
    }
    return Vec2{ux(rng), uy(rng)};
  };
  for (int i = 0; i < ours; ++i)
    w.robots.push_back({i, sslai::Team::Ours, sslai::Pose(place(), yaw(rng)), {vel(rng), vel(rng)}, 0.0, false});
  for (int i = 0; i < theirs; ++i)
    w.robots.push_back({i, sslai::Team::Theirs, sslai::Pose(place(), yaw(rng)), {vel(rng), vel(rng)}, 0.0, false});
  return w;
}

}  // namespace oracle
