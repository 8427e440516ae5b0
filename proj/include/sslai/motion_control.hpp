#pragma once

// Control block: cut-trapezoid speed profiling along the planned path, PD
// yaw control, and four-wheel omni kinematics with tire-speed clamping.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>

#include "sslai/path_plan.hpp"
#include "sslai/targets.hpp"
#include "sslai/world_model.hpp"

namespace sslai {

struct ProfileParams {
  double a_max = 2.5;
  double v_max = 3.0;
  double v_cut = 0.3;
  double stop_epsilon = 0.005;

  bool valid() const { return a_max > 0 && v_cut > 0 && v_cut < v_max && stop_epsilon > 0; }
};

struct YawGains {
  double kp = 4.0;
  double kd = 0.4;
};

/// Robot-local command: vx forward, vy left, vtheta counter-clockwise.
struct RobotCommand {
  double vx = 0.0;
  double vy = 0.0;
  double vtheta = 0.0;
  int kick_power = 0;
  int dribble_power = 0;

  bool operator==(const RobotCommand&) const = default;
  bool is_stop() const { return vx == 0.0 && vy == 0.0 && vtheta == 0.0 && kick_power == 0 && dribble_power == 0; }
  double ground_speed() const { return std::hypot(vx, vy); }
};

using WheelSpeeds = std::array<double, 4>;

/// Speed command for the remaining distance. The trapezoid is cut at both
/// ends: any nonzero command is floored at v_cut, and inside stop_epsilon the
/// command is a hard zero.
inline double profile_speed(double d_remaining, double v_current, double dt, const ProfileParams& p) {
  if (d_remaining < p.stop_epsilon) return 0.0;
  const double accel_limited = v_current + p.a_max * dt;
  const double braking = std::sqrt(2.0 * p.a_max * d_remaining);
  return std::max(p.v_cut, std::min({p.v_max, accel_limited, braking}));
}

/// PD on wrapped yaw error. The finite difference is wrapped too, so an
/// error crossing +-pi does not produce a 2pi derivative spike.
inline double yaw_pd(double error, double error_prev, double dt, const YawGains& g, double omega_limit) {
  const double derivative = wrap_angle(error - error_prev) / dt;
  const double omega = g.kp * error + g.kd * derivative;
  return std::clamp(omega, -omega_limit, omega_limit);
}

inline WheelSpeeds wheel_speeds(double vx, double vy, double vtheta, const RobotParams& params) {
  WheelSpeeds w{};
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double phi = params.wheel_azimuths[i];
    w[i] = (-std::sin(phi) * vx + std::cos(phi) * vy + params.wheel_offset_radius * vtheta) /
           params.wheel_radius;
  }
  return w;
}

inline WheelSpeeds wheel_speeds(const RobotCommand& cmd, const RobotParams& params) {
  return wheel_speeds(cmd.vx, cmd.vy, cmd.vtheta, params);
}

inline double max_abs(const WheelSpeeds& w) {
  double m = 0.0;
  for (double v : w) m = std::max(m, std::abs(v));
  return m;
}

/// Uniformly scales (vx, vy, vtheta) so no wheel exceeds the tire-speed
/// limit; the fastest wheel lands exactly on the limit. Powers are clamped
/// into 0..100.
inline RobotCommand clamp_command(RobotCommand cmd, const RobotParams& params) {
  cmd.kick_power = std::clamp(cmd.kick_power, 0, 100);
  cmd.dribble_power = std::clamp(cmd.dribble_power, 0, 100);
  const double limit = params.max_wheel_omega();
  const double peak = max_abs(wheel_speeds(cmd, params));
  if (peak > limit) {
    const double s = limit / peak;
    cmd.vx *= s;
    cmd.vy *= s;
    cmd.vtheta *= s;
  }
  return cmd;
}

struct ControlSettings {
  ProfileParams profile;
  YawGains gains;
  double omega_limit = 6.0;
  double stop_speed_cap = 1.5;
};

inline double yaw_error(const RobotState& robot, const MotionTarget& target) {
  return wrap_angle(target.target.yaw - robot.pose.yaw);
}

/// Full control step for one robot. `yaw_error_prev` is the controller's
/// memory from the previous frame; when absent the derivative term is zero.
inline RobotCommand compute_command(const RobotState& robot, const MotionTarget& target, const PathPolyline& path,
                                    double dt, const ControlSettings& settings, const RobotParams& params,
                                    GamePhase phase, std::optional<double> yaw_error_prev = std::nullopt) {
  RobotCommand cmd;
  if (phase == GamePhase::Halt) return cmd;

  const bool stop_rules = phase == GamePhase::Stop || target.urgency == Urgency::StopPhase;

  if (path.waypoints.size() >= 2) {
    const Vec2 heading = path.waypoints[1] - path.waypoints[0];
    const double speed = profile_speed(path.length(), robot.velocity.norm(), dt, settings.profile);
    if (speed > 0.0 && heading.norm2() > 0.0) {
      Vec2 field_velocity = heading.normalized() * speed;
      if (stop_rules && speed > settings.stop_speed_cap)
        field_velocity = field_velocity * (settings.stop_speed_cap / speed);
      const Vec2 local = field_velocity.rotated(-robot.pose.yaw);
      cmd.vx = local.x;
      cmd.vy = local.y;
    }
  }

  const double err = yaw_error(robot, target);
  cmd.vtheta = yaw_pd(err, yaw_error_prev.value_or(err), dt, settings.gains, settings.omega_limit);
  cmd.kick_power = stop_rules ? 0 : target.kick_power;
  cmd.dribble_power = target.dribble_power;
  return clamp_command(cmd, params);
}

}  // namespace sslai
