#include <gtest/gtest.h>

#include <algorithm>
#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <condition_variable>
#include <deque>
#include <functional>
#include <optional>

#include "sslai/runtime.hpp"
#include "sslai/ui_server.hpp"

using namespace sslai;

namespace {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

class WsClient {
 public:
  WsClient(int port, const std::string& target, bool reading = true) : ws_(ioc_) {
    tcp::resolver resolver(ioc_);
    asio::connect(ws_.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
    ws_.handshake("127.0.0.1", target);
    if (reading) read();
    thread_ = std::thread([this] { ioc_.run(); });
  }

  ~WsClient() {
    ioc_.stop();
    thread_.join();
  }

  void send(const Json& msg) {
    asio::post(ioc_, [this, text = msg.dump()] { ws_.write(asio::buffer(text)); });
  }

  /// Pumps `pump` until a message satisfying `pred` arrives; consumes it.
  std::optional<Json> wait(const std::function<bool(const Json&)>& pred, const std::function<void()>& pump,
                           std::chrono::milliseconds timeout = std::chrono::milliseconds(5000)) {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    while (std::chrono::steady_clock::now() < deadline) {
      {
        std::lock_guard lk(mu_);
        while (!inbox_.empty()) {
          Json j = Json::parse(inbox_.front());
          inbox_.pop_front();
          if (pred(j)) return j;
        }
      }
      if (pump) pump();
      std::this_thread::sleep_for(std::chrono::milliseconds(1));
    }
    return std::nullopt;
  }

  std::size_t received() const { return received_.load(); }

 private:
  void read() {
    ws_.async_read(buffer_, [this](beast::error_code ec, std::size_t) {
      if (ec) return;
      {
        std::lock_guard lk(mu_);
        inbox_.push_back(beast::buffers_to_string(buffer_.data()));
        while (inbox_.size() > 2000) inbox_.pop_front();
      }
      ++received_;
      buffer_.consume(buffer_.size());
      read();
    });
  }

  asio::io_context ioc_;
  websocket::stream<tcp::socket> ws_;
  beast::flat_buffer buffer_;
  std::mutex mu_;
  std::deque<std::string> inbox_;
  std::atomic<std::size_t> received_{0};
  std::thread thread_;
};

std::pair<int, std::string> http_get(int port, const std::string& target) {
  asio::io_context ioc;
  beast::tcp_stream stream(ioc);
  tcp::resolver resolver(ioc);
  stream.connect(resolver.resolve("127.0.0.1", std::to_string(port)));
  http::request<http::empty_body> req(http::verb::get, target, 11);
  req.set(http::field::host, "127.0.0.1");
  http::write(stream, req);
  beast::flat_buffer buf;
  http::response<http::string_body> res;
  http::read(stream, buf, res);
  return {res.result_int(), res.body()};
}

EngineConfig gateway_config(const std::string& token = "") {
  EngineConfig cfg;
  cfg.ui.port = 0;
  cfg.ui.publish_hz = 200;
  cfg.ui.token = token;
  return cfg;
}

bool is_ack(const Json& j) { return j.value("type", "") == "ack"; }
bool is_snapshot(const Json& j) { return j.value("type", "") == "snapshot"; }

struct Rig {
  explicit Rig(const std::string& token = "") : runtime(gateway_config(token)), server(runtime.hub(), runtime.console(), runtime.config().ui) {}
  Runtime runtime;
  UiServer server;
  std::function<void()> pump() {
    return [this] { runtime.iterate(); };
  }
};

Json referee(const char* cmd, int id) { return {{"kind", "REFEREE"}, {"command", cmd}, {"id", id}}; }

}  // namespace

TEST(Gateway, ForceStartInStopShowsRun) {
  Rig rig;
  WsClient c(rig.server.port(), "/ws");
  c.send(referee("STOP", 1));
  auto ack = c.wait(is_ack, rig.pump());
  ASSERT_TRUE(ack);
  EXPECT_TRUE((*ack)["ok"].get<bool>());
  EXPECT_EQ(rig.runtime.phase(), GamePhase::Stop);

  c.send(referee("FORCE_START", 2));
  ack = c.wait(is_ack, rig.pump());
  ASSERT_TRUE(ack);
  EXPECT_EQ((*ack)["id"], 2);
  const auto frame = rig.runtime.hub().latest().second->frame_id;
  const auto snap = c.wait([&](const Json& j) { return is_snapshot(j) && j["frame_id"].get<std::uint64_t>() >= frame; },
                           rig.pump());
  ASSERT_TRUE(snap);
  EXPECT_EQ((*snap)["phase"], "RUN");
}

TEST(Gateway, SnapshotFrameIdsIncreaseWhileRunning) {
  Rig rig;
  WsClient c(rig.server.port(), "/ws");
  c.send(referee("STOP", 1));
  c.send(referee("FORCE_START", 2));
  std::vector<std::uint64_t> ids;
  for (int i = 0; i < 20; ++i) {
    auto s = c.wait(is_snapshot, rig.pump());
    ASSERT_TRUE(s);
    ids.push_back((*s)["frame_id"].get<std::uint64_t>());
  }
  for (std::size_t i = 1; i < ids.size(); ++i) EXPECT_GT(ids[i], ids[i - 1]);
}

TEST(Gateway, ManualDriveEchoedInNextSnapshot) {
  Rig rig;
  WsClient c(rig.server.port(), "/ws");
  c.send(referee("STOP", 1));
  c.send(referee("FORCE_START", 2));
  c.send({{"kind", "MANUAL_DRIVE"}, {"robot", 3}, {"vy", 0.5}, {"id", 3}});
  ASSERT_TRUE(c.wait([](const Json& j) { return is_ack(j) && j["id"] == 3; }, rig.pump()));
  const auto frame = rig.runtime.hub().latest().second->frame_id;
  const auto snap = c.wait([&](const Json& j) { return is_snapshot(j) && j["frame_id"].get<std::uint64_t>() > frame; },
                           rig.pump());
  ASSERT_TRUE(snap);
  const RobotCommand expect = clamp_command({0.0, 0.5, 0.0, 0, 0}, RobotParams{});
  bool found = false;
  for (const auto& cmd : (*snap)["commands"]) {
    if (cmd["id"] != 3) continue;
    found = true;
    EXPECT_EQ(cmd["vx"].get<double>(), expect.vx);
    EXPECT_EQ(cmd["vy"].get<double>(), expect.vy);
    EXPECT_EQ(cmd["vtheta"].get<double>(), expect.vtheta);
    EXPECT_EQ(cmd["manual"], true);
  }
  EXPECT_TRUE(found);

  c.send({{"kind", "MANUAL_DRIVE"}, {"robot", 3}, {"release", true}, {"id", 4}});
  ASSERT_TRUE(c.wait([](const Json& j) { return is_ack(j) && j["id"] == 4; }, rig.pump()));
  rig.runtime.iterate();
  EXPECT_TRUE(rig.runtime.hub().latest().second->manual.empty());
}

TEST(Gateway, ParamSetCapsSpeed) {
  Rig rig;
  WsClient c(rig.server.port(), "/ws");
  c.send(referee("STOP", 1));
  c.send(referee("FORCE_START", 2));
  c.send({{"kind", "PARAM_SET"}, {"params", {{"v_max", 2.0}}}, {"id", 5}});
  const auto ack = c.wait([](const Json& j) { return is_ack(j) && j["id"] == 5; }, rig.pump());
  ASSERT_TRUE(ack);
  EXPECT_TRUE((*ack)["ok"].get<bool>());
  EXPECT_EQ(rig.runtime.config().control.profile.v_max, 2.0);
  double fastest = 0.0;
  for (int i = 0; i < 600; ++i) {
    rig.runtime.iterate();
    for (const auto& [id, cmd] : rig.runtime.last_report()->commands) fastest = std::max(fastest, cmd.ground_speed());
  }
  EXPECT_GT(fastest, 1.0);
  EXPECT_LE(fastest, 2.0 + 1e-9);
}

TEST(Gateway, RejectsUnknownParamAndMalformed) {
  Rig rig;
  WsClient c(rig.server.port(), "/ws");
  c.send({{"kind", "PARAM_SET"}, {"params", {{"warp_factor", 9}}}, {"id", 6}});
  auto ack = c.wait(is_ack, rig.pump());
  ASSERT_TRUE(ack);
  EXPECT_FALSE((*ack)["ok"].get<bool>());
  EXPECT_EQ((*ack)["reason"], "unknown param 'warp_factor'");
  EXPECT_EQ(rig.runtime.config().control.profile.v_max, EngineConfig{}.control.profile.v_max);

  c.send({{"kind", "MANUAL_DRIVE"}, {"robot", "three"}, {"id", 7}});
  ack = c.wait(is_ack, rig.pump());
  ASSERT_TRUE(ack);
  EXPECT_FALSE((*ack)["ok"].get<bool>());
  EXPECT_EQ((*ack)["id"], 7);
}

TEST(Gateway, TokenRequired) {
  Rig rig("s3cret");
  {
    WsClient c(rig.server.port(), "/ws");
    c.send(referee("STOP", 1));
    const auto ack = c.wait(is_ack, rig.pump());
    ASSERT_TRUE(ack);
    EXPECT_FALSE((*ack)["ok"].get<bool>());
    EXPECT_EQ((*ack)["reason"], "bad token");
    EXPECT_EQ(rig.runtime.phase(), GamePhase::Halt);
  }
  {
    WsClient c(rig.server.port(), "/ws?token=s3cret");
    c.send(referee("STOP", 2));
    const auto ack = c.wait(is_ack, rig.pump());
    ASSERT_TRUE(ack);
    EXPECT_TRUE((*ack)["ok"].get<bool>());
    EXPECT_EQ(rig.runtime.phase(), GamePhase::Stop);
  }
}

TEST(Gateway, HttpEndpoints) {
  Rig rig;
  rig.runtime.iterate();
  const auto [code, body] = http_get(rig.server.port(), "/api/snapshot");
  EXPECT_EQ(code, 200);
  const Json j = Json::parse(body);
  EXPECT_EQ(j["type"], "snapshot");
  EXPECT_EQ(j["phase"], "HALT");
  EXPECT_EQ(j["world"]["robots"].size(), 12u);
  EXPECT_EQ(http_get(rig.server.port(), "/").first, 200);
  EXPECT_EQ(http_get(rig.server.port(), "/missing.js").first, 404);
}

TEST(Gateway, SubscribersDoNotSlowTheTick) {
  // two identical simulations in lockstep; only one of them has subscribers
  Rig quiet, busy;
  for (Rig* r : {&quiet, &busy}) {
    r->runtime.console().submit(parse_operator_command(referee("STOP", 0), "", true));
    r->runtime.console().submit(parse_operator_command(referee("FORCE_START", 0), "", true));
  }
  std::vector<std::unique_ptr<WsClient>> clients;
  for (int i = 0; i < 4; ++i) clients.push_back(std::make_unique<WsClient>(busy.server.port(), "/ws"));
  clients.push_back(std::make_unique<WsClient>(busy.server.port(), "/ws", false));  // never reads

  auto timed = [](Runtime& r) {
    const auto t0 = std::chrono::steady_clock::now();
    r.iterate();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  std::vector<double> a, b;
  for (int i = 0; i < 1500; ++i) {
    const double ta = timed(quiet.runtime);
    const double tb = timed(busy.runtime);
    if (i < 100) continue;
    a.push_back(ta);
    b.push_back(tb);
    std::this_thread::sleep_for(std::chrono::microseconds(500));
  }
  auto median = [](std::vector<double> v) {
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2), v.end());
    return v[v.size() / 2];
  };
  const double ma = median(a), mb = median(b);
  RecordProperty("median_0_subscribers_ms", std::to_string(ma * 1e3));
  RecordProperty("median_5_subscribers_ms", std::to_string(mb * 1e3));
  EXPECT_EQ(busy.server.subscribers(), 5u);
  EXPECT_GT(clients[0]->received(), 10u);
  EXPECT_LE(mb, 1.25 * ma + 1e-4) << "0 subscribers " << ma * 1e3 << " ms, 5 subscribers " << mb * 1e3 << " ms";
}
