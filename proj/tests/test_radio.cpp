#include <gtest/gtest.h>

#include <chrono>
#include <random>
#include <set>
#include <thread>

#include "sslai/frame_engine.hpp"
#include "sslai/radio.hpp"

using namespace sslai;

TEST(UdpCsv, Examples) {
  EXPECT_EQ(encode_udp_csv({1.0, -0.5, 3.14, 50, 100}), "1.000,-0.500,3.140,50,100\n");
  EXPECT_EQ(encode_udp_csv({}), "0.000,0.000,0.000,0,0\n");
  const RobotCommand c = decode_udp_csv("1.000,-0.500,3.140,50,100\n");
  EXPECT_EQ(c, (RobotCommand{1.0, -0.5, 3.14, 50, 100}));
}

TEST(UdpCsv, Errors) {
  EXPECT_THROW(decode_udp_csv("1,2,3,4"), DecodeError);
  EXPECT_THROW(decode_udp_csv("a,b,c,d,e"), DecodeError);
  EXPECT_THROW(decode_udp_csv("1,2,3,4,5,6"), DecodeError);
  EXPECT_THROW(decode_udp_csv(""), DecodeError);
  EXPECT_THROW(decode_udp_csv("1,2,nan,0,0"), DecodeError);
}

TEST(UdpCsv, PowersClampOnDecode) {
  const RobotCommand c = decode_udp_csv("0,0,0,150,-4");
  EXPECT_EQ(c.kick_power, 100);
  EXPECT_EQ(c.dribble_power, 0);
}

TEST(UdpCsv, RoundTripAtMillimetreResolution) {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> mm(-5000, 5000), pw(0, 100);
  for (int i = 0; i < 5000; ++i) {
    const RobotCommand c{mm(rng) / 1000.0, mm(rng) / 1000.0, mm(rng) / 1000.0, pw(rng), pw(rng)};
    const RobotCommand d = decode_udp_csv(encode_udp_csv(c));
    ASSERT_NEAR(d.vx, c.vx, 1e-12);
    ASSERT_NEAR(d.vy, c.vy, 1e-12);
    ASSERT_NEAR(d.vtheta, c.vtheta, 1e-12);
    ASSERT_EQ(d.kick_power, c.kick_power);
    ASSERT_EQ(d.dribble_power, c.dribble_power);
  }
}

TEST(SerialFrame, Layout) {
  const auto z = encode_serial_frame(0, {});
  EXPECT_EQ(z.size(), 17u);
  EXPECT_EQ(z[0], 0xFF);
  for (std::size_t i = 1; i < 17; ++i) EXPECT_EQ(z[i], 0) << i;

  const auto f = encode_serial_frame(3, {1.0, 0, 0, 0, 0});
  EXPECT_EQ(f[1], 3);
  EXPECT_EQ(f[2], 0x00);
  EXPECT_EQ(f[3], 0x00);
  EXPECT_EQ(f[4], 0x80);
  EXPECT_EQ(f[5], 0x3F);
  std::uint8_t x = 0;
  for (std::size_t i = 1; i < 16; ++i) x ^= f[i];
  EXPECT_EQ(f[16], x);
  EXPECT_THROW(encode_serial_frame(16, {}), std::invalid_argument);
}

TEST(SerialFrame, CorruptChecksumCounted) {
  auto f = encode_serial_frame(2, {0.5, 0.25, -1.0, 10, 20});
  f[16] ^= 0x01;
  SerialDecoder dec;
  EXPECT_TRUE(dec.feed(f).empty());
  EXPECT_EQ(dec.error_count(), 1u);
  EXPECT_THROW(decode_serial_frame(f), DecodeError);
}

TEST(SerialFrame, ResyncAfterGarbage) {
  const auto f = encode_serial_frame(5, {0.5, 0.25, -1.0, 10, 20});
  std::vector<std::uint8_t> bytes{0x12, 0xFF, 0x00, 0x33};
  bytes.insert(bytes.end(), f.begin(), f.end());
  SerialDecoder dec;
  const auto msgs = dec.feed(bytes);
  ASSERT_EQ(msgs.size(), 1u);
  EXPECT_EQ(msgs[0].robot_id, 5);
  EXPECT_EQ(msgs[0].command, (RobotCommand{0.5, 0.25, -1.0, 10, 20}));
}

TEST(SerialFrame, ByteAtATime) {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<float> u(-5.0f, 5.0f);
  std::vector<SerialMessage> sent;
  std::vector<std::uint8_t> stream;
  for (int i = 0; i < 50; ++i) {
    SerialMessage m{static_cast<int>(rng() % 16), {u(rng), u(rng), u(rng), static_cast<int>(rng() % 101), 7}};
    sent.push_back(m);
    const auto f = encode_serial_frame(m.robot_id, m.command);
    stream.insert(stream.end(), f.begin(), f.end());
  }
  SerialDecoder dec;
  std::vector<SerialMessage> got;
  for (std::uint8_t b : stream) {
    const auto msgs = dec.feed(std::span(&b, 1));
    got.insert(got.end(), msgs.begin(), msgs.end());
  }
  EXPECT_EQ(got, sent);
  EXPECT_EQ(dec.error_count(), 0u);
  EXPECT_EQ(dec.buffered(), 0u);
}

TEST(Endpoint, Parse) {
  EXPECT_EQ(parse_endpoint(1, "192.168.1.11:10001"), (RobotEndpoint{1, TransportKind::Udp, "192.168.1.11:10001"}));
  EXPECT_EQ(parse_endpoint(2, "serial:/dev/ttyUSB0"), (RobotEndpoint{2, TransportKind::Serial, "/dev/ttyUSB0"}));
  EXPECT_THROW(parse_endpoint(1, "192.168.1.11"), std::invalid_argument);
  EXPECT_THROW(parse_endpoint(1, "host:80"), std::invalid_argument);
  EXPECT_THROW(parse_endpoint(1, "10.0.0.1:70000"), std::invalid_argument);
  EXPECT_THROW(parse_endpoint(1, "serial:"), std::invalid_argument);
}

namespace {

class Recorder : public Transport {
 public:
  std::string send(const RobotEndpoint& ep, std::span<const std::uint8_t> payload) override {
    sent.emplace_back(ep.robot_id, std::vector<std::uint8_t>(payload.begin(), payload.end()));
    return fail ? "boom" : "";
  }
  std::vector<std::pair<int, std::vector<std::uint8_t>>> sent;
  bool fail = false;
};

}  // namespace

TEST(Dispatch, EmptyMapSendsNothing) {
  Recorder udp;
  const std::vector<RobotEndpoint> table{{0, TransportKind::Udp, "127.0.0.1:9"}};
  const auto r = dispatch({}, table, {&udp, nullptr});
  EXPECT_TRUE(r.results.empty());
  EXPECT_TRUE(udp.sent.empty());
}

TEST(Dispatch, UnknownIdReportedOthersSent) {
  Recorder udp, serial;
  const std::vector<RobotEndpoint> table{{0, TransportKind::Udp, "127.0.0.1:9"},
                                         {2, TransportKind::Serial, "/dev/null"}};
  const std::map<int, RobotCommand> cmds{{0, {1, 0, 0, 0, 0}}, {1, {}}, {2, {0, 1, 0, 0, 0}}};
  const auto r = dispatch(cmds, table, {&udp, &serial});
  EXPECT_EQ(r.successes(), 2u);
  EXPECT_EQ(r.failures(), 1u);
  ASSERT_EQ(udp.sent.size(), 1u);
  EXPECT_EQ(std::string(udp.sent[0].second.begin(), udp.sent[0].second.end()), "1.000,0.000,0.000,0,0\n");
  ASSERT_EQ(serial.sent.size(), 1u);
  EXPECT_EQ(serial.sent[0].second.size(), kSerialFrameSize);
  for (const auto& res : r.results)
    if (res.robot_id == 1) EXPECT_FALSE(res.ok);
}

TEST(Dispatch, TransportFailureReported) {
  Recorder udp;
  udp.fail = true;
  const std::vector<RobotEndpoint> table{{0, TransportKind::Udp, "127.0.0.1:9"}};
  const auto r = dispatch({{0, {}}}, table, {&udp, nullptr});
  ASSERT_EQ(r.failures(), 1u);
  EXPECT_EQ(r.results[0].error, "boom");
}

TEST(Dispatch, SixRobotsOverLoopbackUdp) {
  std::mutex mu;
  std::multiset<std::string> got;
  UdpListener listener(0, [&](std::string_view p) {
    std::lock_guard lk(mu);
    got.insert(std::string(p));
  });
  std::vector<RobotEndpoint> table;
  std::map<int, RobotCommand> cmds;
  std::multiset<std::string> expect;
  for (int id = 0; id < 6; ++id) {
    table.push_back(parse_endpoint(id, "127.0.0.1:" + std::to_string(listener.port())));
    cmds[id] = {0.1 * id, -0.2 * id, 0.5, id * 10, 0};
    expect.insert(encode_udp_csv(cmds[id]));
  }
  UdpTransport udp;
  const auto r = dispatch(cmds, table, {&udp, nullptr});
  EXPECT_EQ(r.successes(), 6u);
  for (int i = 0; i < 100; ++i) {
    {
      std::lock_guard lk(mu);
      if (got.size() >= 6) break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  std::lock_guard lk(mu);
  EXPECT_EQ(got, expect);
}

TEST(RadioSender, LatestCommandWins) {
  Recorder udp;
  const std::vector<RobotEndpoint> table{{0, TransportKind::Udp, "127.0.0.1:9"}};
  {
    RadioSender sender(table, {&udp, nullptr});
    sender.submit({{0, {1, 0, 0, 0, 0}}});
    sender.submit({{0, {2, 0, 0, 0, 0}}});
    for (int i = 0; i < 100 && sender.batches_sent() == 0; ++i)
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    EXPECT_GE(sender.batches_sent(), 1u);
  }
  ASSERT_FALSE(udp.sent.empty());
  const auto& last = udp.sent.back().second;
  EXPECT_EQ(std::string(last.begin(), last.end()), "2.000,0.000,0.000,0,0\n");
}
