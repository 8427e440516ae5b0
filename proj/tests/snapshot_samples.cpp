// Prints JSON lines for schema checking.
//   snapshot_samples snapshots <ticks>   one snapshot per simulated tick, then an empty-world one
//   snapshot_samples commands            every accepted operator command form

#include <cstdlib>
#include <iostream>
#include <string>

#include "sslai/runtime.hpp"

using namespace sslai;

namespace {

int snapshots(int ticks) {
  RuntimeOptions opt;
  opt.auto_referee = true;
  Runtime rt(EngineConfig{}, opt);
  std::uint64_t last_version = 0;
  for (int i = 0; i < ticks; ++i) {
    rt.iterate();
    const auto [version, snap] = rt.hub().latest();
    if (version == last_version) continue;
    last_version = version;
    std::cout << to_json(*snap).dump() << '\n';
  }
  EngineConfig empty;
  empty.robots_per_side = 0;
  Runtime idle(empty, RuntimeOptions{});
  std::cout << to_json(*idle.hub().latest().second).dump() << '\n';
  std::cout << to_json(StateSnapshot{}).dump() << '\n';
  return 0;
}

int commands() {
  const char* samples[] = {
      R"({"kind":"REFEREE","command":"HALT"})",
      R"({"kind":"REFEREE","command":"FORCE_START","id":1})",
      R"({"kind":"REFEREE","command":"PREPARE_KICKOFF_THEM","id":"abc","token":"t"})",
      R"({"kind":"MANUAL_DRIVE","robot":3,"vy":0.5})",
      R"({"kind":"MANUAL_DRIVE","robot":0,"vx":-1,"vy":0.25,"vtheta":2,"kick":100,"dribble":0})",
      R"({"kind":"MANUAL_DRIVE","robot":15,"release":true})",
      R"({"kind":"PARAM_SET","params":{"v_max":2.0}})",
      R"({"kind":"PARAM_SET","params":{"motion.kp":5,"potential.shadow_weight":1.5}})",
      R"({"kind":"SIM_CONTROL","action":"pause"})",
      R"({"kind":"SIM_CONTROL","action":"resume"})",
      R"({"kind":"SIM_CONTROL","action":"step","steps":10})",
  };
  for (const char* s : samples) {
    const Json j = Json::parse(s);
    parse_operator_command(j, "", true);  // throws if the engine would reject it
    std::cout << j.dump() << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string mode = argc > 1 ? argv[1] : "";
  try {
    if (mode == "snapshots") return snapshots(argc > 2 ? std::atoi(argv[2]) : 1000);
    if (mode == "commands") return commands();
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return 1;
  }
  std::cerr << "usage: snapshot_samples snapshots <ticks> | commands\n";
  return 2;
}
