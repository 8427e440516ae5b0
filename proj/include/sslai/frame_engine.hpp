#pragma once

// Event-driven frame pipeline. Each vision frame triggers one tick:
// strategy -> role skills -> path plan -> motion control -> radio encode,
// all inside one frame period.
//
// Vision packets are line text, one packet per frame:
//   F <frame_id> <timestamp>
//   B <x> <y> <vx> <vy>
//   R <us|them> <id> <x> <y> <yaw> <vx> <vy> <vyaw>
// Lines with any other leading key are ignored. Referee packets are a single
// uppercase token (HALT, STOP, FORCE_START, NORMAL_START,
// PREPARE_KICKOFF_US, PREPARE_KICKOFF_THEM).

#include <netinet/in.h>
#include <sys/socket.h>
#include <sys/time.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "sslai/config.hpp"
#include "sslai/motion_control.hpp"
#include "sslai/pass_potential.hpp"
#include "sslai/path_plan.hpp"
#include "sslai/radio.hpp"
#include "sslai/strategy.hpp"
#include "sslai/world_model.hpp"

namespace sslai {

namespace detail {

inline std::vector<std::string_view> tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

inline WorldFrame decode_vision_packet(std::string_view packet) {
  WorldFrame frame;
  bool have_frame = false;
  bool have_ball = false;
  int lineno = 0;
  auto fail = [&lineno](const std::string& what) -> DecodeError {
    return DecodeError("vision line " + std::to_string(lineno) + ": " + what);
  };
  auto real = [&](std::string_view tok) {
    auto v = detail::parse_number<double>(tok);
    if (!v || !std::isfinite(*v)) throw fail("bad number '" + std::string(tok) + "'");
    return *v;
  };

  for (auto line : detail::split(packet, '\n')) {
    ++lineno;
    const auto tok = detail::tokens(line);
    if (tok.empty()) continue;
    if (tok[0] == "F") {
      if (tok.size() != 3) throw fail("F expects 2 fields");
      if (have_frame) throw fail("duplicate F line");
      auto id = detail::parse_number<std::uint64_t>(tok[1]);
      if (!id) throw fail("bad frame id");
      frame.frame_id = *id;
      frame.timestamp = real(tok[2]);
      have_frame = true;
    } else if (tok[0] == "B") {
      if (tok.size() != 5) throw fail("B expects 4 fields");
      if (have_ball) throw fail("duplicate B line");
      frame.ball.position = {real(tok[1]), real(tok[2])};
      frame.ball.velocity = {real(tok[3]), real(tok[4])};
      have_ball = true;
    } else if (tok[0] == "R") {
      if (tok.size() != 9) throw fail("R expects 8 fields");
      RobotState r;
      auto team = team_from_string(tok[1]);
      if (!team) throw fail("team must be us or them");
      r.team = *team;
      auto id = detail::parse_number<int>(tok[2]);
      if (!id || *id < 0) throw fail("bad robot id");
      r.id = *id;
      if (frame.find(r.team, r.id) != nullptr) throw fail("duplicate robot id");
      r.pose = Pose({real(tok[3]), real(tok[4])}, real(tok[5]));
      r.velocity = {real(tok[6]), real(tok[7])};
      r.yaw_rate = real(tok[8]);
      frame.robots.push_back(r);
      if (frame.team(r.team).size() > static_cast<std::size_t>(kMaxRobotsPerTeam)) throw fail("too many robots");
    }
  }
  if (!have_frame) throw DecodeError("vision packet: missing F line");
  if (!have_ball) throw DecodeError("vision packet: missing B line");
  return frame;
}

/// Canonical text: F, B, then R lines in frame order; numbers round-trip exactly.
inline std::string encode_vision_packet(const WorldFrame& frame) {
  std::string out = "F " + std::to_string(frame.frame_id) + " " + detail::fmt17(frame.timestamp) + "\n";
  out += "B " + detail::fmt17(frame.ball.position.x) + " " + detail::fmt17(frame.ball.position.y) + " " +
         detail::fmt17(frame.ball.velocity.x) + " " + detail::fmt17(frame.ball.velocity.y) + "\n";
  for (const auto& r : frame.robots) {
    out += "R " + std::string(to_string(r.team)) + " " + std::to_string(r.id) + " " +
           detail::fmt17(r.pose.position.x) + " " + detail::fmt17(r.pose.position.y) + " " +
           detail::fmt17(r.pose.yaw) + " " + detail::fmt17(r.velocity.x) + " " + detail::fmt17(r.velocity.y) + " " +
           detail::fmt17(r.yaw_rate) + "\n";
  }
  return out;
}

inline RefereeCommand decode_referee_packet(std::string_view packet) {
  const auto tok = detail::trim(packet);
  auto cmd = referee_command_from_string(tok);
  if (!cmd) throw DecodeError("referee: unknown token '" + std::string(tok) + "'");
  return *cmd;
}

/// Single-slot mailbox: a post overwrites whatever has not been taken yet.
template <typename T>
class Mailbox {
 public:
  void post(T value) {
    {
      std::lock_guard lk(mu_);
      if (slot_) ++overwritten_;
      slot_ = std::move(value);
    }
    cv_.notify_one();
  }

  std::optional<T> take() {
    std::lock_guard lk(mu_);
    return std::exchange(slot_, std::nullopt);
  }

  template <typename Rep, typename Period>
  std::optional<T> wait_take(std::chrono::duration<Rep, Period> timeout) {
    std::unique_lock lk(mu_);
    cv_.wait_for(lk, timeout, [this] { return slot_.has_value(); });
    return std::exchange(slot_, std::nullopt);
  }

  /// Values replaced before anyone took them.
  std::size_t overwritten() const {
    std::lock_guard lk(mu_);
    return overwritten_;
  }

 private:
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::optional<T> slot_;
  std::size_t overwritten_ = 0;
};

/// Binds a UDP port and hands every datagram to `on_packet` from a
/// background thread.
class UdpListener {
 public:
  using Handler = std::function<void(std::string_view)>;

  UdpListener(int port, Handler on_packet) : handler_(std::move(on_packet)) {
    fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
    if (fd_ < 0) throw std::runtime_error("udp listener: socket failed");
    int yes = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
    timeval tv{0, 100000};
    ::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
    sockaddr_in sa{};
    sa.sin_family = AF_INET;
    sa.sin_addr.s_addr = htonl(INADDR_ANY);
    sa.sin_port = htons(static_cast<std::uint16_t>(port));
    if (::bind(fd_, reinterpret_cast<sockaddr*>(&sa), sizeof sa) != 0) {
      ::close(fd_);
      throw std::runtime_error("udp listener: cannot bind port " + std::to_string(port));
    }
    socklen_t len = sizeof sa;
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&sa), &len);
    port_ = ntohs(sa.sin_port);
    thread_ = std::thread([this] { run(); });
  }

  ~UdpListener() {
    running_ = false;
    thread_.join();
    ::close(fd_);
  }

  UdpListener(const UdpListener&) = delete;
  UdpListener& operator=(const UdpListener&) = delete;

  int port() const { return port_; }

 private:
  void run() {
    std::vector<char> buf(65536);
    while (running_) {
      const auto n = ::recv(fd_, buf.data(), buf.size(), 0);
      if (n <= 0) continue;
      try {
        handler_(std::string_view(buf.data(), static_cast<std::size_t>(n)));
      } catch (const std::exception& e) {
        std::fprintf(stderr, "udp listener %d: %s\n", port_, e.what());
      }
    }
  }

  Handler handler_;
  int fd_ = -1;
  int port_ = 0;
  std::atomic<bool> running_{true};
  std::thread thread_;
};

struct EngineTickReport {
  std::uint64_t frame_id = 0;
  GamePhase phase = GamePhase::Halt;
  RoleAssignment assignment;
  std::map<int, RobotCommand> commands;
  double elapsed = 0.0;  // seconds, wall clock
  bool overrun = false;

  std::map<int, MotionTarget> targets;
  std::map<int, PathPolyline> paths;
  std::map<int, std::vector<std::uint8_t>> packets;  // radio payload per robot
  std::shared_ptr<const PotentialGrid> pass_grid;
  std::vector<std::string> errors;

  /// One line for the tick log: frame, phase, elapsed, then id:role/slot pairs.
  std::string log_line() const {
    std::ostringstream os;
    os << frame_id << ' ' << to_string(phase) << ' ' << elapsed * 1e3 << "ms";
    for (const auto& [id, r] : assignment.roles) os << ' ' << id << ':' << to_string(r.kind) << '/' << r.slot;
    for (const auto& e : errors) os << " !" << e;
    return os.str();
  }
};

/// The world as the other team sees it: teams swapped, everything rotated
/// half a turn about the field centre. Robot-local commands are unchanged
/// by this transform.
inline WorldFrame mirror_world(const WorldFrame& w) {
  WorldFrame m = w;
  m.ball.position = -w.ball.position;
  m.ball.velocity = -w.ball.velocity;
  for (auto& r : m.robots) {
    r.team = other(r.team);
    r.pose = Pose(-r.pose.position, r.pose.yaw + kPi);
    r.velocity = -r.velocity;
  }
  return m;
}

inline GamePhase mirror_phase(GamePhase p) {
  if (p == GamePhase::PrepareKickoffUs) return GamePhase::PrepareKickoffThem;
  if (p == GamePhase::PrepareKickoffThem) return GamePhase::PrepareKickoffUs;
  return p;
}

class Engine {
 public:
  explicit Engine(EngineConfig cfg = {}) : cfg_(std::move(cfg)) { cfg_.validate(); }

  const EngineConfig& config() const { return cfg_; }

  void set_config(EngineConfig cfg) {
    cfg.validate();
    cfg_ = std::move(cfg);
  }

  /// Operator override: the robot drives `cmd` (post-clamp) instead of its role.
  void set_manual(int robot_id, const RobotCommand& cmd) { manual_[robot_id] = cmd; }
  void release_manual(int robot_id) { manual_.erase(robot_id); }
  std::set<int> manual_robots() const {
    std::set<int> out;
    for (const auto& [id, _] : manual_) out.insert(id);
    return out;
  }

  std::size_t overruns() const { return overruns_; }

  EngineTickReport tick(const WorldFrame& world, GamePhase phase) {
    const auto t0 = std::chrono::steady_clock::now();
    EngineTickReport rep;
    rep.frame_id = world.frame_id;
    rep.phase = phase;

    const auto& s = cfg_.strategy;
    std::vector<const RobotState*> ours = world.team(Team::Ours);
    const auto requests = select_role_set(world, phase, ours.size(), s.policy);

    auto grid = std::make_shared<PotentialGrid>(build_pass_grid(world, s));
    rep.pass_grid = grid;
    StrategyContext ctx = make_context(world, phase, s, grid.get(), requests);
    rep.assignment = assign_roles(requests, world, ctx);
    if (rep.assignment.count(RoleKind::Waiter) > 0) ctx.waiter_grid = build_waiter_grid(world, rep.assignment, s);

    std::map<int, double> next_memory;
    for (const RobotState* robot : ours) {
      const RoleSlot role = rep.assignment.roles.at(robot->id);
      RobotCommand cmd;
      try {
        const MotionTarget target = run_role(role.kind, role.slot, *robot, ctx);
        rep.targets[robot->id] = target;
        const PathPolyline path = plan_for(*robot, target.target.position, world);
        rep.paths[robot->id] = path;
        std::optional<double> prev;
        if (auto it = yaw_memory_.find(robot->id); it != yaw_memory_.end()) prev = it->second;
        cmd = compute_command(*robot, target, path, cfg_.dt(), cfg_.control, s.robot, phase, prev);
        next_memory[robot->id] = yaw_error(*robot, target);
      } catch (const std::exception& e) {
        cmd = RobotCommand{};
        rep.errors.push_back("robot " + std::to_string(robot->id) + ": " + e.what());
      }
      if (auto it = manual_.find(robot->id); it != manual_.end()) cmd = clamp_command(it->second, s.robot);
      if (phase == GamePhase::Halt) cmd = RobotCommand{};
      rep.commands[robot->id] = cmd;
    }
    yaw_memory_ = std::move(next_memory);

    for (const auto& [id, cmd] : rep.commands) rep.packets[id] = encode_for(id, cmd);

    rep.elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rep.overrun = rep.elapsed > cfg_.dt();
    if (rep.overrun) ++overruns_;
    return rep;
  }

 private:
  PathPolyline plan_for(const RobotState& robot, Vec2 goal, const WorldFrame& world) const {
    const double r = 2.0 * cfg_.strategy.robot.robot_radius;
    const double inflated = r + cfg_.planner.margin;
    std::vector<Obstacle> obstacles;
    for (const auto& o : world.robots) {
      if (o.team == robot.team && o.id == robot.id) continue;
      // overlapping discs cannot be planned around; leave them to the margin of the next frame
      if (distance(o.pose.position, robot.pose.position) < inflated || distance(o.pose.position, goal) < inflated)
        continue;
      obstacles.push_back({o.pose.position, r});
    }
    try {
      return plan_path(robot.pose.position, goal, obstacles, cfg_.planner);
    } catch (const PathBlocked&) {
      // only the first waypoint is followed; retry against the nearby discs
      std::erase_if(obstacles, [&](const Obstacle& o) {
        return distance(o.center, robot.pose.position) > cfg_.planner_horizon;
      });
      return plan_path(robot.pose.position, goal, obstacles, cfg_.planner);
    }
  }

  std::vector<std::uint8_t> encode_for(int id, const RobotCommand& cmd) const {
    for (const auto& ep : cfg_.endpoints) {
      if (ep.robot_id != id) continue;
      if (ep.transport == TransportKind::Serial && id <= kMaxSerialRobotId) {
        const auto f = encode_serial_frame(id, cmd);
        return {f.begin(), f.end()};
      }
      break;
    }
    const std::string text = encode_udp_csv(cmd);
    return {text.begin(), text.end()};
  }

  EngineConfig cfg_;
  std::map<int, double> yaw_memory_;
  std::map<int, RobotCommand> manual_;
  std::size_t overruns_ = 0;
};

}  // namespace sslai
