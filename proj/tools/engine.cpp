// engine: run the team AI live or against the simulator, record matches,
// and replay recorded matches.

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include "CLI11.hpp"
#include "sslai/match.hpp"
#include "sslai/runtime.hpp"
#include "sslai/ui_server.hpp"

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

sslai::EngineConfig load(const std::string& path) {
  return path.empty() ? sslai::EngineConfig{} : sslai::load_config(path);
}

int cmd_run(const std::string& config_path, bool sim, bool headless, std::optional<std::uint64_t> ticks,
            std::uint64_t seed, std::optional<int> port) {
  auto cfg = load(config_path);
  if (port) cfg.ui.port = *port;
  sslai::RuntimeOptions opt;
  opt.simulate = sim;
  opt.auto_referee = sim && headless;
  opt.max_ticks = ticks;
  opt.seed = seed;
  sslai::Runtime rt(cfg, opt);

  std::unique_ptr<sslai::UiServer> ui;
  if (!headless) {
    ui = std::make_unique<sslai::UiServer>(rt.hub(), rt.console(), cfg.ui);
    std::cout << "operator console on http://localhost:" << ui->port() << "/ (ws at /ws)\n";
  }
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);

  std::size_t overruns = 0;
  std::uint64_t last_logged = 0;
  const auto log_every = static_cast<std::uint64_t>(cfg.frame_rate);
  const auto period =
      std::chrono::duration_cast<std::chrono::steady_clock::duration>(std::chrono::duration<double>(cfg.dt()));
  auto next = std::chrono::steady_clock::now();
  while (!g_stop) {
    const bool more = rt.iterate();
    const auto& rep = rt.last_report();
    if (rep && rt.ticks() != last_logged) {
      last_logged = rt.ticks();
      if (rep->overrun) ++overruns;
      if (!rep->errors.empty() || rt.ticks() % log_every == 0) std::cout << rep->log_line() << "\n";
    }
    if (!more) break;
    if (sim && !ticks) {
      next = std::max(next + period, std::chrono::steady_clock::now());
      std::this_thread::sleep_until(next);
    }
  }
  std::cout << "ticks " << rt.ticks() << " overruns " << overruns << "\n";
  return 0;
}

int cmd_sim(std::uint64_t ticks, std::uint64_t seed, const std::string& record, const std::string& config_path,
            std::optional<int> robots) {
  auto cfg = load(config_path);
  if (robots) {
    cfg.robots_per_side = *robots;
    cfg.validate();
  }
  sslai::EventLog log;
  log.ticks = ticks;
  log.seed = seed;
  log.config = sslai::dump_config(cfg);
  log.events = sslai::run_match(ticks, seed, cfg);

  std::map<std::string, int> counts;
  for (const auto& e : log.events) ++counts[std::string(sslai::to_string(e.kind))];
  for (const auto& [k, n] : counts) std::cout << k << " " << n << "\n";
  if (!record.empty()) {
    std::ofstream out(record);
    if (!out) {
      std::cerr << "cannot write " << record << "\n";
      return 1;
    }
    sslai::write_event_log(out, log);
    std::cout << "recorded " << log.events.size() << " events to " << record << "\n";
  }
  return 0;
}

int cmd_replay(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "cannot read " << path << "\n";
    return 1;
  }
  const auto log = sslai::read_event_log(in);
  const auto cfg = sslai::parse_config(log.config);
  const auto events = sslai::run_match(log.ticks, log.seed, cfg);
  const std::size_t n = std::min(events.size(), log.events.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (events[i] != log.events[i]) {
      std::cout << "mismatch at event " << i << ": recorded '" << log.events[i].to_line() << "', replayed '"
                << events[i].to_line() << "'\n";
      return 1;
    }
  }
  if (events.size() != log.events.size()) {
    std::cout << "mismatch: recorded " << log.events.size() << " events, replayed " << events.size() << "\n";
    return 1;
  }
  std::cout << "replay ok: " << events.size() << " events over " << log.ticks << " ticks\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SSL team AI engine"};
  app.require_subcommand(1);

  std::string config_path;
  bool sim = false;
  bool headless = false;
  std::optional<std::uint64_t> run_ticks;
  std::uint64_t seed = 1;
  std::optional<int> port;
  auto* run = app.add_subcommand("run", "run the engine (live vision or --sim)");
  run->add_option("--config", config_path, "key = value config file");
  run->add_flag("--sim", sim, "drive the built-in simulator instead of UDP vision");
  run->add_flag("--headless", headless, "no operator gateway; the simulator referees itself");
  run->add_option("--ticks", run_ticks, "stop after this many ticks");
  run->add_option("--seed", seed, "simulator seed");
  run->add_option("--port", port, "gateway port (overrides ui.port)");

  std::uint64_t sim_ticks = 3000;
  std::string record;
  std::optional<int> robots;
  auto* simc = app.add_subcommand("sim", "run a closed-loop match and record its event log");
  simc->add_option("--ticks", sim_ticks, "ticks to simulate")->check(CLI::PositiveNumber);
  simc->add_option("--seed", seed, "seed");
  simc->add_option("--record", record, "event log output");
  simc->add_option("--config", config_path, "key = value config file");
  simc->add_option("--robots", robots, "robots per side")->check(CLI::Range(0, sslai::kMaxRobotsPerTeam));

  std::string replay_path;
  auto* replay = app.add_subcommand("replay", "re-run a recorded match and compare event logs");
  replay->add_option("log", replay_path, "event log from `engine sim --record`")->required();

  auto* dump = app.add_subcommand("dump-config", "print every config key with its value");
  dump->add_option("--config", config_path, "key = value config file");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(config_path, sim, headless, run_ticks, seed, port);
    if (*simc) return cmd_sim(sim_ticks, seed, record, config_path, robots);
    if (*replay) return cmd_replay(replay_path);
    if (*dump) {
      std::cout << sslai::dump_config(load(config_path));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
