#pragma once

// Robot command downlink. Two wire formats:
//
//   UDP/Wi-Fi  "<vx>,<vy>,<vtheta>,<kick>,<dribble>\n", velocities with three
//              decimals, powers as integers, one datagram per robot address.
//
//   XBee (AT mode, 115200 8N1), 17-byte frame:
//     [0]      0xFF start
//     [1]      robot id (0..15)
//     [2..13]  vx, vy, vtheta as IEEE-754 float32, little-endian
//     [14]     kick power (0..100)
//     [15]     dribble power (0..100)
//     [16]     XOR of bytes [1..15]
//
// Velocities are robot-local: vx forward, vy left, vtheta counter-clockwise.

#include <fcntl.h>
#include <netinet/in.h>
#include <arpa/inet.h>
#include <sys/socket.h>
#include <termios.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cerrno>
#include <charconv>
#include <condition_variable>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "sslai/motion_control.hpp"

namespace sslai {

class DecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string encode_udp_csv(const RobotCommand& cmd) {
  char buf[128];
  const int n = std::snprintf(buf, sizeof buf, "%.3f,%.3f,%.3f,%d,%d\n", cmd.vx, cmd.vy, cmd.vtheta,
                              std::clamp(cmd.kick_power, 0, 100), std::clamp(cmd.dribble_power, 0, 100));
  return std::string(buf, static_cast<std::size_t>(n));
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r' || s.front() == '\n'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n'))
    s.remove_suffix(1);
  return s;
}

template <typename T>
std::optional<T> parse_number(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return value;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

}  // namespace detail

inline RobotCommand decode_udp_csv(std::string_view text) {
  const auto fields = detail::split(detail::trim(text), ',');
  if (fields.size() != 5)
    throw DecodeError("udp csv: expected 5 fields, got " + std::to_string(fields.size()));
  RobotCommand cmd;
  double* vel[3] = {&cmd.vx, &cmd.vy, &cmd.vtheta};
  for (int i = 0; i < 3; ++i) {
    auto v = detail::parse_number<double>(fields[static_cast<std::size_t>(i)]);
    if (!v || !std::isfinite(*v)) throw DecodeError("udp csv: field " + std::to_string(i + 1) + " is not a number");
    *vel[i] = *v;
  }
  int* power[2] = {&cmd.kick_power, &cmd.dribble_power};
  for (int i = 0; i < 2; ++i) {
    auto v = detail::parse_number<long long>(fields[static_cast<std::size_t>(i) + 3]);
    if (!v) throw DecodeError("udp csv: field " + std::to_string(i + 4) + " is not an integer");
    *power[i] = static_cast<int>(std::clamp<long long>(*v, 0, 100));
  }
  return cmd;
}

inline constexpr std::uint8_t kSerialStart = 0xFF;
inline constexpr std::size_t kSerialFrameSize = 17;
inline constexpr int kMaxSerialRobotId = 15;
inline constexpr int kSerialBaud = 115200;

using SerialFrame = std::array<std::uint8_t, kSerialFrameSize>;

namespace detail {

inline void put_f32(std::uint8_t* out, double v) {
  const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
  for (int i = 0; i < 4; ++i) out[i] = static_cast<std::uint8_t>(bits >> (8 * i));
}

inline float get_f32(const std::uint8_t* in) {
  std::uint32_t bits = 0;
  for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(in[i]) << (8 * i);
  return std::bit_cast<float>(bits);
}

inline std::uint8_t xor_checksum(std::span<const std::uint8_t> bytes) {
  std::uint8_t c = 0;
  for (auto b : bytes) c ^= b;
  return c;
}

}  // namespace detail

/// Velocities are narrowed to float32; powers are clamped into 0..100.
inline SerialFrame encode_serial_frame(int robot_id, const RobotCommand& cmd) {
  if (robot_id < 0 || robot_id > kMaxSerialRobotId)
    throw std::invalid_argument("serial frame: robot id out of range 0..15");
  SerialFrame f{};
  f[0] = kSerialStart;
  f[1] = static_cast<std::uint8_t>(robot_id);
  detail::put_f32(&f[2], cmd.vx);
  detail::put_f32(&f[6], cmd.vy);
  detail::put_f32(&f[10], cmd.vtheta);
  f[14] = static_cast<std::uint8_t>(std::clamp(cmd.kick_power, 0, 100));
  f[15] = static_cast<std::uint8_t>(std::clamp(cmd.dribble_power, 0, 100));
  f[16] = detail::xor_checksum(std::span(f).subspan(1, 15));
  return f;
}

struct SerialMessage {
  int robot_id = 0;
  RobotCommand command;

  bool operator==(const SerialMessage&) const = default;
};

/// Streaming frame decoder. Bytes may arrive in any chunking; the decoder
/// hunts for the start byte, waits for a full frame, and drops candidates
/// that fail the checksum or field checks, resuming the hunt one byte later.
class SerialDecoder {
 public:
  std::vector<SerialMessage> feed(std::span<const std::uint8_t> bytes) {
    buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
    std::vector<SerialMessage> out;
    std::size_t pos = 0;
    while (true) {
      while (pos < buffer_.size() && buffer_[pos] != kSerialStart) ++pos;
      if (buffer_.size() - pos < kSerialFrameSize) break;
      if (auto msg = parse(&buffer_[pos])) {
        out.push_back(*msg);
        pos += kSerialFrameSize;
      } else {
        ++errors_;
        ++pos;
      }
    }
    buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(pos));
    return out;
  }

  /// Candidate frames rejected so far.
  std::size_t error_count() const { return errors_; }
  std::size_t buffered() const { return buffer_.size(); }

 private:
  static std::optional<SerialMessage> parse(const std::uint8_t* f) {
    if (detail::xor_checksum(std::span(f + 1, 15)) != f[16]) return std::nullopt;
    if (f[1] > kMaxSerialRobotId || f[14] > 100 || f[15] > 100) return std::nullopt;
    SerialMessage m;
    m.robot_id = f[1];
    m.command.vx = detail::get_f32(f + 2);
    m.command.vy = detail::get_f32(f + 6);
    m.command.vtheta = detail::get_f32(f + 10);
    if (!std::isfinite(m.command.vx) || !std::isfinite(m.command.vy) || !std::isfinite(m.command.vtheta))
      return std::nullopt;
    m.command.kick_power = f[14];
    m.command.dribble_power = f[15];
    return m;
  }

  std::vector<std::uint8_t> buffer_;
  std::size_t errors_ = 0;
};

/// One-shot decode of a single complete frame.
inline SerialMessage decode_serial_frame(std::span<const std::uint8_t> bytes) {
  SerialDecoder dec;
  auto msgs = dec.feed(bytes);
  if (msgs.empty()) throw DecodeError("serial: no valid frame");
  return msgs.front();
}

enum class TransportKind : std::uint8_t { Udp, Serial };

struct RobotEndpoint {
  int robot_id = 0;
  TransportKind transport = TransportKind::Udp;
  std::string address;  // "ip:port" or a serial device path

  bool operator==(const RobotEndpoint&) const = default;
};

/// Parses a config value: "192.168.1.<n>:<port>" or "serial:<device>".
inline RobotEndpoint parse_endpoint(int robot_id, std::string_view value) {
  value = detail::trim(value);
  if (value.starts_with("serial:")) {
    auto dev = value.substr(7);
    if (dev.empty()) throw std::invalid_argument("endpoint: empty serial device");
    return {robot_id, TransportKind::Serial, std::string(dev)};
  }
  const auto colon = value.rfind(':');
  if (colon == std::string_view::npos) throw std::invalid_argument("endpoint: expected ip:port");
  in_addr addr{};
  const std::string host(value.substr(0, colon));
  if (inet_pton(AF_INET, host.c_str(), &addr) != 1) throw std::invalid_argument("endpoint: bad IPv4 address " + host);
  auto port = detail::parse_number<int>(value.substr(colon + 1));
  if (!port || *port <= 0 || *port > 65535) throw std::invalid_argument("endpoint: bad port");
  return {robot_id, TransportKind::Udp, std::string(value)};
}

/// Byte sink for one transport kind. Implementations must not block.
class Transport {
 public:
  virtual ~Transport() = default;
  /// Returns an empty string on success, else the failure reason.
  virtual std::string send(const RobotEndpoint& ep, std::span<const std::uint8_t> payload) = 0;
};

class UdpTransport : public Transport {
 public:
  UdpTransport() : fd_(::socket(AF_INET, SOCK_DGRAM, 0)) {
    if (fd_ < 0) throw std::runtime_error(std::string("udp socket: ") + std::strerror(errno));
  }
  ~UdpTransport() override { ::close(fd_); }
  UdpTransport(const UdpTransport&) = delete;
  UdpTransport& operator=(const UdpTransport&) = delete;

  std::string send(const RobotEndpoint& ep, std::span<const std::uint8_t> payload) override {
    const auto colon = ep.address.rfind(':');
    sockaddr_in sa{};
    sa.sin_family = AF_INET;
    if (colon == std::string::npos || inet_pton(AF_INET, ep.address.substr(0, colon).c_str(), &sa.sin_addr) != 1)
      return "bad address " + ep.address;
    sa.sin_port = htons(static_cast<std::uint16_t>(std::stoi(ep.address.substr(colon + 1))));
    const auto n = ::sendto(fd_, payload.data(), payload.size(), MSG_DONTWAIT, reinterpret_cast<sockaddr*>(&sa),
                            sizeof sa);
    if (n < 0) return std::string("sendto: ") + std::strerror(errno);
    return {};
  }

 private:
  int fd_;
};

/// XBee in transparent (AT) mode: raw 115200 8N1, non-blocking writes.
class SerialTransport : public Transport {
 public:
  ~SerialTransport() override {
    for (auto& [_, fd] : fds_) ::close(fd);
  }

  std::string send(const RobotEndpoint& ep, std::span<const std::uint8_t> payload) override {
    int fd = open_device(ep.address);
    if (fd < 0) return "cannot open " + ep.address + ": " + std::strerror(errno);
    const auto n = ::write(fd, payload.data(), payload.size());
    if (n < 0) return std::string("write: ") + std::strerror(errno);
    if (static_cast<std::size_t>(n) != payload.size()) return "short write";
    return {};
  }

 private:
  int open_device(const std::string& path) {
    if (auto it = fds_.find(path); it != fds_.end()) return it->second;
    int fd = ::open(path.c_str(), O_RDWR | O_NOCTTY | O_NONBLOCK);
    if (fd < 0) return fd;
    termios tio{};
    if (::tcgetattr(fd, &tio) == 0) {
      ::cfmakeraw(&tio);
      ::cfsetispeed(&tio, B115200);
      ::cfsetospeed(&tio, B115200);
      tio.c_cflag &= ~static_cast<tcflag_t>(CSTOPB | PARENB | CSIZE);
      tio.c_cflag |= CS8 | CLOCAL | CREAD;
      ::tcsetattr(fd, TCSANOW, &tio);
    }
    fds_[path] = fd;
    return fd;
  }

  std::map<std::string, int> fds_;
};

struct SendResult {
  int robot_id = 0;
  bool ok = false;
  std::string error;
};

struct SendReport {
  std::vector<SendResult> results;

  std::size_t successes() const {
    return static_cast<std::size_t>(std::count_if(results.begin(), results.end(), [](auto& r) { return r.ok; }));
  }
  std::size_t failures() const { return results.size() - successes(); }
};

struct Transports {
  Transport* udp = nullptr;
  Transport* serial = nullptr;
};

/// Encodes each command for its robot's endpoint and sends it. Robots
/// missing from the table and transport failures are reported per robot;
/// the rest are still sent.
inline SendReport dispatch(const std::map<int, RobotCommand>& commands, std::span<const RobotEndpoint> table,
                           Transports transports) {
  SendReport report;
  for (const auto& [id, cmd] : commands) {
    const auto ep = std::find_if(table.begin(), table.end(), [id](const RobotEndpoint& e) { return e.robot_id == id; });
    if (ep == table.end()) {
      report.results.push_back({id, false, "unknown robot id"});
      continue;
    }
    std::string err;
    try {
      if (ep->transport == TransportKind::Udp) {
        const std::string text = encode_udp_csv(cmd);
        const std::span bytes(reinterpret_cast<const std::uint8_t*>(text.data()), text.size());
        err = transports.udp ? transports.udp->send(*ep, bytes) : "no udp transport";
      } else {
        const SerialFrame frame = encode_serial_frame(id, cmd);
        err = transports.serial ? transports.serial->send(*ep, frame) : "no serial transport";
      }
    } catch (const std::exception& e) {
      err = e.what();
    }
    report.results.push_back({id, err.empty(), err});
  }
  return report;
}

/// Sender thread decoupled from the engine tick. submit() never blocks on
/// I/O; if the thread is still busy, newer commands replace older ones
/// per robot.
class RadioSender {
 public:
  RadioSender(std::vector<RobotEndpoint> table, Transports transports)
      : table_(std::move(table)), transports_(transports), thread_([this] { run(); }) {}

  ~RadioSender() {
    {
      std::lock_guard lk(mu_);
      stop_ = true;
    }
    cv_.notify_all();
    thread_.join();
  }

  void submit(const std::map<int, RobotCommand>& commands) {
    {
      std::lock_guard lk(mu_);
      for (const auto& [id, c] : commands) pending_[id] = c;
    }
    cv_.notify_one();
  }

  SendReport last_report() const {
    std::lock_guard lk(mu_);
    return last_;
  }

  std::size_t batches_sent() const {
    std::lock_guard lk(mu_);
    return batches_;
  }

 private:
  void run() {
    std::unique_lock lk(mu_);
    while (true) {
      cv_.wait(lk, [this] { return stop_ || !pending_.empty(); });
      if (stop_) return;
      auto batch = std::move(pending_);
      pending_.clear();
      lk.unlock();
      auto report = dispatch(batch, table_, transports_);
      lk.lock();
      last_ = std::move(report);
      ++batches_;
    }
  }

  std::vector<RobotEndpoint> table_;
  Transports transports_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::map<int, RobotCommand> pending_;
  SendReport last_;
  std::size_t batches_ = 0;
  bool stop_ = false;
  std::thread thread_;
};

}  // namespace sslai
