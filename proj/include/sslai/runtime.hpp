#pragma once

// Live loop behind `engine run`. In sim mode the loop owns a Match and
// steps it once per frame period; otherwise it ticks on every vision frame
// from UDP and hands the commands to the radio sender. Operator commands
// are applied between ticks, never during one.

#include <atomic>
#include <chrono>
#include <deque>
#include <memory>
#include <optional>
#include <thread>

#include "sslai/match.hpp"
#include "sslai/ui_protocol.hpp"

namespace sslai {

struct RuntimeOptions {
  bool simulate = true;
  bool auto_referee = false;  // sim only; otherwise the operator is the referee
  std::optional<std::uint64_t> max_ticks;
  std::uint64_t seed = 1;
  std::size_t recent_events = 20;
};

class Runtime {
 public:
  Runtime(EngineConfig cfg, RuntimeOptions opt = {}) : cfg_(std::move(cfg)), opt_(opt) {
    if (opt_.simulate) {
      MatchOptions mo;
      mo.seed = opt_.seed;
      mo.auto_referee = opt_.auto_referee;
      match_.emplace(cfg_, mo);
    } else {
      engine_.emplace(cfg_);
      vision_listener_ = std::make_unique<UdpListener>(cfg_.vision_port, [this](std::string_view p) {
        vision_.post(decode_vision_packet(p));
      });
      referee_listener_ = std::make_unique<UdpListener>(cfg_.referee_port, [this](std::string_view p) {
        referee_.post(decode_referee_packet(p));
      });
      udp_ = std::make_unique<UdpTransport>();
      serial_ = std::make_unique<SerialTransport>();
      radio_ = std::make_unique<RadioSender>(cfg_.endpoints, Transports{udp_.get(), serial_.get()});
    }
    publish();
  }

  OperatorConsole& console() { return console_; }
  SnapshotHub& hub() { return hub_; }
  GamePhase phase() const { return match_ ? match_->phase() : phase_; }
  std::uint64_t ticks() const { return ticks_; }
  bool paused() const { return paused_; }
  const EngineConfig& config() const { return cfg_; }
  const std::optional<EngineTickReport>& last_report() const { return last_; }

  /// One loop pass: apply queued operator commands, tick if due, publish.
  /// Returns false once max_ticks is reached.
  bool iterate() {
    apply_operator_commands();
    if (match_) {
      if (!paused_ || step_budget_ > 0) {
        if (step_budget_ > 0) --step_budget_;
        MatchTick mt = match_->step();
        for (auto& e : mt.events) remember(e);
        last_ = std::move(mt.ours);
        ++ticks_;
      }
    } else {
      if (auto cmd = referee_.take()) set_phase(update_phase(phase_, *cmd));
      const auto wait = std::chrono::duration<double>(cfg_.dt());
      if (auto frame = vision_.wait_take(wait)) {
        last_world_ = *frame;
        last_ = engine_->tick(last_world_, phase_);
        radio_->submit(last_->commands);
        ++ticks_;
      }
    }
    publish();
    return !opt_.max_ticks || ticks_ < *opt_.max_ticks;
  }

 private:
  Engine& engine() { return match_ ? match_->engine() : *engine_; }

  void set_phase(GamePhase next) {
    if (match_) return;
    if (next != phase_) remember({ticks_, EventKind::PhaseChange, Team::Ours, {}, next});
    phase_ = next;
  }

  void remember(const MatchEvent& e) {
    recent_.push_back(e);
    while (recent_.size() > opt_.recent_events) recent_.pop_front();
  }

  void apply_operator_commands() {
    for (auto& p : console_.drain()) {
      Ack ack;
      ack.id = p.command.id;
      ack.kind = to_string(p.command.kind);
      try {
        apply(p.command);
      } catch (const std::exception& e) {
        ack.ok = false;
        ack.reason = e.what();
      }
      if (p.reply) p.reply(ack);
    }
  }

  void apply(const OperatorCommand& c) {
    switch (c.kind) {
      case CommandKind::Referee:
        if (match_) {
          if (auto e = match_->referee(c.referee)) remember(*e);
        } else {
          set_phase(update_phase(phase_, c.referee));
        }
        break;
      case CommandKind::ManualDrive:
        if (c.release)
          engine().release_manual(c.robot);
        else
          engine().set_manual(c.robot, c.drive);
        break;
      case CommandKind::ParamSet: {
        EngineConfig next = cfg_;
        for (const auto& [name, value] : c.params) set_tunable(next, name, value);
        if (match_)
          match_->set_config(next);
        else
          engine_->set_config(next);
        cfg_ = std::move(next);
        break;
      }
      case CommandKind::SimControl:
        if (!match_) throw CommandRejected("not running a simulation");
        if (c.action == SimAction::Pause) paused_ = true;
        if (c.action == SimAction::Resume) {
          paused_ = false;
          step_budget_ = 0;
        }
        if (c.action == SimAction::Step) {
          paused_ = true;
          step_budget_ += c.steps;
        }
        break;
    }
  }

  void publish() {
    auto s = std::make_shared<StateSnapshot>();
    s->phase = phase();
    s->simulated = match_.has_value();
    s->paused = paused_;
    s->field = cfg_.field();
    s->manual = engine().manual_robots();
    s->world = match_ ? match_->world() : last_world_;
    if (last_) {
      s->frame_id = last_->frame_id;
      s->elapsed = last_->elapsed;
      s->assignment = last_->assignment;
      s->commands = last_->commands;
      s->paths = last_->paths;
      s->pass_grid = last_->pass_grid;
      s->errors = last_->errors;
    }
    if (match_) s->frame_id = match_->world().frame_id;
    s->events.assign(recent_.begin(), recent_.end());
    hub_.publish(std::move(s));
  }

  EngineConfig cfg_;
  RuntimeOptions opt_;
  std::optional<Match> match_;
  std::optional<Engine> engine_;
  GamePhase phase_ = GamePhase::Halt;
  bool paused_ = false;
  int step_budget_ = 0;
  std::uint64_t ticks_ = 0;
  std::optional<EngineTickReport> last_;
  WorldFrame last_world_;
  std::deque<MatchEvent> recent_;

  OperatorConsole console_;
  SnapshotHub hub_;
  Mailbox<WorldFrame> vision_;
  Mailbox<RefereeCommand> referee_;
  std::unique_ptr<UdpListener> vision_listener_;
  std::unique_ptr<UdpListener> referee_listener_;
  std::unique_ptr<UdpTransport> udp_;
  std::unique_ptr<SerialTransport> serial_;
  std::unique_ptr<RadioSender> radio_;
};

}  // namespace sslai
