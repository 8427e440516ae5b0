#pragma once

// Closed-loop matches: engine(s) + simulator + an automatic referee, and the
// flat event log written by `engine sim` and checked by `engine replay`.

#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "sslai/config.hpp"
#include "sslai/frame_engine.hpp"
#include "sslai/simulator.hpp"

namespace sslai {

/// Kickoff formation for `n` robots per side, ours in the negative half.
/// `seed` jitters every robot by up to 0.15 m.
inline WorldFrame kickoff_world(int n, std::uint64_t seed, const FieldGeometry& geo,
                                OpponentMode opponents = OpponentMode::Mirror) {
  static constexpr std::array<std::array<double, 2>, kMaxRobotsPerTeam> kSpots{{
      {-0.95, 0.0},  {-0.15, 0.0},   {-0.6, 0.25},  {-0.6, -0.25}, {-0.3, 0.55},  {-0.3, -0.55},
      {-0.45, 0.8},  {-0.45, -0.8},  {-0.75, 0.6},  {-0.75, -0.6}, {-0.2, 0.85},  {-0.2, -0.85},
      {-0.85, 0.35}, {-0.85, -0.35}, {-0.4, 0.0},   {-0.7, 0.0},
  }};
  WorldFrame w;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-0.15, 0.15);
  const double hx = geo.length / 2.0;
  const double hy = geo.width / 2.0;
  for (int i = 0; i < n; ++i) {
    const auto& s = kSpots[static_cast<std::size_t>(i)];
    Vec2 p{s[0] * hx, s[1] * hy};
    if (i > 0) p += Vec2{jitter(rng), jitter(rng)};
    p.x = std::min(p.x, -0.6);
    w.robots.push_back({i, Team::Ours, Pose(p, 0.0), {}, 0.0, false});
  }
  if (opponents != OpponentMode::None) {
    for (int i = 0; i < n; ++i) {
      const auto& r = w.robots[static_cast<std::size_t>(i)];
      Vec2 p = -r.pose.position;
      if (i > 0) p += Vec2{jitter(rng), jitter(rng)};
      p.x = std::max(p.x, 0.6);
      w.robots.push_back({i, Team::Theirs, Pose(p, kPi), {}, 0.0, false});
    }
  }
  return w;
}

/// Kickoff cycle: STOP, PREPARE_KICKOFF for the team to kick, NORMAL_START.
/// After a goal the conceding team kicks off.
class AutoReferee {
 public:
  int stop_ticks = 30;
  int prepare_ticks = 120;

  /// The command to issue before the next tick, if any.
  std::optional<RefereeCommand> poll(GamePhase phase) {
    ++ticks_in_phase_;
    if (phase == GamePhase::Halt) return RefereeCommand::Stop;
    if (phase == GamePhase::Stop && ticks_in_phase_ >= stop_ticks)
      return kicker_ == Team::Ours ? RefereeCommand::PrepareKickoffUs : RefereeCommand::PrepareKickoffThem;
    if ((phase == GamePhase::PrepareKickoffUs || phase == GamePhase::PrepareKickoffThem) &&
        ticks_in_phase_ >= prepare_ticks)
      return RefereeCommand::NormalStart;
    return std::nullopt;
  }

  void phase_changed() { ticks_in_phase_ = 0; }

  void goal(Team scorer) { kicker_ = other(scorer); }

 private:
  int ticks_in_phase_ = 0;
  Team kicker_ = Team::Ours;
};

/// A kick followed, before any opposing contact, by a teammate gaining
/// the ball. Any other contact, a goal, or a phase change cancels it.
class PassTracker {
 public:
  std::optional<MatchEvent> observe(const MatchEvent& e) {
    switch (e.kind) {
      case EventKind::Kick:
        pending_ = e;
        return std::nullopt;
      case EventKind::BallContactGained: {
        if (!pending_) return std::nullopt;
        const MatchEvent kick = *std::exchange(pending_, std::nullopt);
        if (e.team != kick.team || e.ids.front() == kick.ids.front()) return std::nullopt;
        return MatchEvent{e.tick, EventKind::PassCompleted, e.team, {kick.ids.front(), e.ids.front()}, {}};
      }
      case EventKind::Goal:
      case EventKind::PhaseChange:
        pending_.reset();
        return std::nullopt;
      case EventKind::PassCompleted:
        return std::nullopt;
    }
    return std::nullopt;
  }

 private:
  std::optional<MatchEvent> pending_;
};

struct MatchOptions {
  std::optional<WorldFrame> initial;       // default: kickoff formation
  std::optional<GamePhase> fixed_phase;    // disables the automatic referee
  bool auto_referee = true;
  GamePhase start_phase = GamePhase::Halt;
  std::uint64_t seed = 1;
};

struct MatchTick {
  EngineTickReport ours;
  std::vector<MatchEvent> events;
};

class Match {
 public:
  Match(EngineConfig cfg, MatchOptions opt = {})
      : cfg_(std::move(cfg)), opt_(std::move(opt)), ours_(cfg_), theirs_(opponent_config(cfg_)) {
    state_.world = opt_.initial ? *opt_.initial
                                : kickoff_world(cfg_.robots_per_side, opt_.seed, cfg_.field(), cfg_.opponents);
    phase_ = opt_.fixed_phase.value_or(opt_.start_phase);
  }

  const SimState& state() const { return state_; }
  const WorldFrame& world() const { return state_.world; }
  GamePhase phase() const { return phase_; }
  const std::vector<MatchEvent>& events() const { return events_; }
  Engine& engine() { return ours_; }
  const EngineConfig& config() const { return cfg_; }

  void set_config(EngineConfig cfg) {
    ours_.set_config(cfg);
    theirs_.set_config(opponent_config(cfg));
    cfg_ = std::move(cfg);
  }

  /// Applies a referee command now; returns the PHASE_CHANGE event if the
  /// phase moved.
  std::optional<MatchEvent> referee(RefereeCommand cmd) {
    const GamePhase next = update_phase(phase_, cmd);
    if (next == phase_) return std::nullopt;
    phase_ = next;
    referee_.phase_changed();
    MatchEvent e{state_.tick, EventKind::PhaseChange, Team::Ours, {}, next};
    record(e, nullptr);
    return e;
  }

  MatchTick step() {
    MatchTick out;
    if (!opt_.fixed_phase && opt_.auto_referee) {
      if (auto cmd = referee_.poll(phase_)) {
        if (auto e = referee(*cmd)) out.events.push_back(*e);
      }
    }

    out.ours = ours_.tick(state_.world, phase_);
    CommandMap commands;
    for (const auto& [id, c] : out.ours.commands) commands[{Team::Ours, id}] = c;
    if (cfg_.opponents == OpponentMode::Mirror && !state_.world.team(Team::Theirs).empty()) {
      const auto rep = theirs_.tick(mirror_world(state_.world), mirror_phase(phase_));
      for (const auto& [id, c] : rep.commands) commands[{Team::Theirs, id}] = c;
    }

    StepOutcome next = step_physics(commands);
    state_ = std::move(next.state);
    for (const auto& e : next.events) {
      record(e, &out.events);
      if (e.kind == EventKind::Goal) {
        referee_.goal(e.team);
        if (!opt_.fixed_phase && opt_.auto_referee) {
          if (auto pc = referee(RefereeCommand::Stop)) out.events.push_back(*pc);
        }
      }
    }
    return out;
  }

 private:
  static EngineConfig opponent_config(EngineConfig cfg) {
    cfg.endpoints.clear();
    return cfg;
  }

  StepOutcome step_physics(const CommandMap& commands) {
    return sslai::step(state_, commands, cfg_.physics());
  }

  // PASS_COMPLETED lands right after the contact that closed it
  void record(const MatchEvent& e, std::vector<MatchEvent>* also) {
    events_.push_back(e);
    if (also != nullptr) also->push_back(e);
    if (auto pass = passes_.observe(e)) {
      events_.push_back(*pass);
      if (also != nullptr) also->push_back(*pass);
    }
  }

  EngineConfig cfg_;
  MatchOptions opt_;
  Engine ours_;
  Engine theirs_;
  SimState state_;
  GamePhase phase_ = GamePhase::Halt;
  AutoReferee referee_;
  PassTracker passes_;
  std::vector<MatchEvent> events_;
};

using TickObserver = std::function<void(const Match&, const MatchTick&)>;

inline std::vector<MatchEvent> run_match(std::uint64_t ticks, const EngineConfig& cfg, MatchOptions opt = {},
                                         const TickObserver& observer = {}) {
  if (cfg.robots_per_side == 0 && !opt.initial) return {};
  Match m(cfg, std::move(opt));
  for (std::uint64_t t = 0; t < ticks; ++t) {
    const MatchTick mt = m.step();
    if (observer) observer(m, mt);
  }
  return m.events();
}

inline std::vector<MatchEvent> run_match(std::uint64_t ticks, std::uint64_t seed, const EngineConfig& cfg) {
  MatchOptions opt;
  opt.seed = seed;
  return run_match(ticks, cfg, opt);
}

struct EventLog {
  std::uint64_t ticks = 0;
  std::uint64_t seed = 0;
  std::string config;  // dump_config text
  std::vector<MatchEvent> events;
};

/// Header lines start with '#': ticks, seed, then one `# set key = value`
/// per config key, so the log alone is enough to re-run the match.
inline void write_event_log(std::ostream& out, const EventLog& log) {
  out << "# ticks " << log.ticks << "\n# seed " << log.seed << "\n";
  std::istringstream cfg(log.config);
  std::string line;
  while (std::getline(cfg, line))
    if (!line.empty()) out << "# set " << line << "\n";
  for (const auto& e : log.events) out << e.to_line() << "\n";
}

inline EventLog read_event_log(std::istream& in) {
  EventLog log;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line.starts_with("# ticks ")) {
      log.ticks = std::stoull(line.substr(8));
    } else if (line.starts_with("# seed ")) {
      log.seed = std::stoull(line.substr(7));
    } else if (line.starts_with("# set ")) {
      log.config += line.substr(6) + "\n";
    } else if (line.starts_with("#")) {
      continue;
    } else {
      auto e = MatchEvent::from_line(line);
      if (!e) throw DecodeError("event log line " + std::to_string(lineno) + ": cannot parse '" + line + "'");
      if (!log.events.empty() && e->tick < log.events.back().tick)
        throw DecodeError("event log line " + std::to_string(lineno) + ": tick goes backwards");
      log.events.push_back(*e);
    }
  }
  return log;
}

}  // namespace sslai
