#pragma once

// HTTP + WebSocket gateway for the operator console. One io thread serves
// the UI bundle over HTTP, `/ws` for snapshots and commands, and
// `/api/snapshot` for a one-shot JSON read. Snapshots are pulled from the
// hub on a timer at ui.publish_hz and serialized once per version; a slow
// client only ever has the newest snapshot queued.

#include <atomic>
#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <chrono>
#include <deque>
#include <filesystem>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "sslai/ui_protocol.hpp"

namespace sslai {

namespace ui_net {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

inline constexpr std::string_view kFallbackIndex = R"(<!doctype html>
<html><head><meta charset="utf-8"><title>sslai console</title></head>
<body><pre id="s">connecting...</pre>
<script>
const q = new URLSearchParams(location.search);
const ws = new WebSocket(`ws://${location.host}/ws?token=${q.get("token") || ""}`);
ws.onmessage = (m) => {
  const s = JSON.parse(m.data);
  if (s.type === "snapshot")
    document.getElementById("s").textContent = `frame ${s.frame_id} ${s.phase} robots ${s.world.robots.length}`;
};
</script></body></html>
)";

inline std::string_view mime_type(const std::filesystem::path& p) {
  const auto ext = p.extension().string();
  if (ext == ".html") return "text/html";
  if (ext == ".js" || ext == ".mjs") return "application/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  return "application/octet-stream";
}

inline std::string query_value(std::string_view target, std::string_view key) {
  const auto q = target.find('?');
  if (q == std::string_view::npos) return {};
  std::string_view rest = target.substr(q + 1);
  while (!rest.empty()) {
    const auto amp = rest.find('&');
    const std::string_view pair = rest.substr(0, amp);
    const auto eq = pair.find('=');
    if (pair.substr(0, eq) == key && eq != std::string_view::npos) return std::string(pair.substr(eq + 1));
    if (amp == std::string_view::npos) break;
    rest = rest.substr(amp + 1);
  }
  return {};
}

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket socket, OperatorConsole& console, std::string token)
      : ws_(std::move(socket)), console_(console), token_(std::move(token)) {}

  template <typename Request>
  void start(Request req, std::shared_ptr<const std::string> first) {
    authorized_ = token_.empty() || query_value(std::string_view(req.target().data(), req.target().size()),
                                                "token") == token_;
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, [self = shared_from_this(), first](beast::error_code ec) {
      if (ec) return;
      self->open_ = true;
      if (first) self->push_snapshot(first);
      self->read();
    });
  }

  bool open() const { return open_; }

  void push_snapshot(std::shared_ptr<const std::string> text) {
    if (!open_) return;
    snapshot_ = std::move(text);  // replaces an unsent older snapshot
    write_next();
  }

  void push_message(std::string text) {
    if (!open_) return;
    messages_.push_back(std::make_shared<const std::string>(std::move(text)));
    write_next();
  }

 private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->open_ = false;
        return;
      }
      self->handle(beast::buffers_to_string(self->buffer_.data()));
      self->buffer_.consume(self->buffer_.size());
      self->read();
    });
  }

  void handle(const std::string& text) {
    Json msg;
    try {
      msg = Json::parse(text);
    } catch (const Json::parse_error&) {
      push_message(rejection(Json(), "malformed JSON").to_json().dump());
      return;
    }
    try {
      OperatorCommand cmd = parse_operator_command(msg, token_, authorized_);
      if (!token_.empty() && !authorized_) authorized_ = true;
      console_.submit(std::move(cmd), [weak = weak_from_this(), ex = ws_.get_executor()](const Ack& ack) {
        asio::post(ex, [weak, text = ack.to_json().dump()]() mutable {
          if (auto self = weak.lock()) self->push_message(std::move(text));
        });
      });
    } catch (const CommandRejected& e) {
      push_message(rejection(msg, e.what()).to_json().dump());
    } catch (const Json::exception& e) {
      push_message(rejection(msg, e.what()).to_json().dump());
    }
  }

  void write_next() {
    if (writing_ || !open_) return;
    std::shared_ptr<const std::string> next;
    if (!messages_.empty()) {
      next = messages_.front();
      messages_.pop_front();
    } else if (snapshot_) {
      next = std::exchange(snapshot_, nullptr);
    } else {
      return;
    }
    writing_ = true;
    ws_.text(true);
    ws_.async_write(asio::buffer(*next), [self = shared_from_this(), next](beast::error_code ec, std::size_t) {
      self->writing_ = false;
      if (ec) {
        self->open_ = false;
        return;
      }
      self->write_next();
    });
  }

  websocket::stream<beast::tcp_stream> ws_;
  OperatorConsole& console_;
  std::string token_;
  bool authorized_ = false;
  bool open_ = false;
  bool writing_ = false;
  beast::flat_buffer buffer_;
  std::deque<std::shared_ptr<const std::string>> messages_;
  std::shared_ptr<const std::string> snapshot_;
};

}  // namespace ui_net

class UiServer {
 public:
  UiServer(SnapshotHub& hub, OperatorConsole& console, UiSettings settings)
      : hub_(hub),
        console_(console),
        settings_(std::move(settings)),
        acceptor_(ioc_),
        timer_(ioc_) {
    using ui_net::tcp;
    tcp::endpoint ep(ui_net::asio::ip::make_address("0.0.0.0"), static_cast<unsigned short>(settings_.port));
    acceptor_.open(ep.protocol());
    acceptor_.set_option(ui_net::asio::socket_base::reuse_address(true));
    acceptor_.bind(ep);
    acceptor_.listen();
    port_ = acceptor_.local_endpoint().port();
    accept();
    schedule_broadcast();
    thread_ = std::thread([this] { ioc_.run(); });
  }

  ~UiServer() { stop(); }

  UiServer(const UiServer&) = delete;
  UiServer& operator=(const UiServer&) = delete;

  int port() const { return port_; }

  void stop() {
    if (stopped_.exchange(true)) return;
    ioc_.stop();
    if (thread_.joinable()) thread_.join();
  }

  std::size_t subscribers() const { return subscribers_.load(); }

 private:
  struct HttpConn : std::enable_shared_from_this<HttpConn> {
    HttpConn(ui_net::tcp::socket s, UiServer& srv) : stream(std::move(s)), server(srv) {}
    ui_net::beast::tcp_stream stream;
    ui_net::beast::flat_buffer buffer;
    ui_net::http::request<ui_net::http::string_body> req;
    UiServer& server;

    void read() {
      stream.expires_after(std::chrono::seconds(30));
      ui_net::http::async_read(stream, buffer, req, [self = shared_from_this()](ui_net::beast::error_code ec, std::size_t) {
        if (ec) return;
        self->server.route(self);
      });
    }
  };

  void accept() {
    acceptor_.async_accept([this](ui_net::beast::error_code ec, ui_net::tcp::socket socket) {
      if (!ec) std::make_shared<HttpConn>(std::move(socket), *this)->read();
      if (!stopped_) accept();
    });
  }

  void route(const std::shared_ptr<HttpConn>& conn) {
    namespace http = ui_net::http;
    auto& req = conn->req;
    const std::string target(req.target());
    const std::string path = target.substr(0, target.find('?'));

    if (ui_net::websocket::is_upgrade(req) && path == "/ws") {
      auto session = std::make_shared<ui_net::WsSession>(conn->stream.release_socket(), console_, settings_.token);
      sessions_.push_back(session);
      session->start(std::move(req), current_text());
      return;
    }

    auto res = std::make_shared<http::response<http::string_body>>(http::status::ok, req.version());
    res->set(http::field::server, "sslai");
    res->keep_alive(false);
    if (path == "/api/snapshot") {
      auto text = current_text();
      res->set(http::field::content_type, "application/json");
      res->body() = text ? *text : "null";
    } else if (auto file = static_file(path)) {
      res->set(http::field::content_type, std::string(ui_net::mime_type(file->first)));
      res->body() = std::move(file->second);
    } else if (path == "/" || path == "/index.html") {
      res->set(http::field::content_type, "text/html");
      res->body() = std::string(ui_net::kFallbackIndex);
    } else {
      res->result(http::status::not_found);
      res->set(http::field::content_type, "text/plain");
      res->body() = "not found";
    }
    res->prepare_payload();
    http::async_write(conn->stream, *res, [conn, res](ui_net::beast::error_code, std::size_t) {
      ui_net::beast::error_code ignored;
      conn->stream.socket().shutdown(ui_net::tcp::socket::shutdown_send, ignored);
    });
  }

  std::optional<std::pair<std::filesystem::path, std::string>> static_file(const std::string& path) const {
    namespace fs = std::filesystem;
    if (settings_.static_dir.empty() || path.find("..") != std::string::npos) return std::nullopt;
    fs::path p = fs::path(settings_.static_dir) / path.substr(1);
    if (path == "/") p = fs::path(settings_.static_dir) / "index.html";
    std::error_code ec;
    if (!fs::is_regular_file(p, ec)) return std::nullopt;
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return std::make_pair(p, os.str());
  }

  // Serializes the hub's newest snapshot, at most once per version.
  std::shared_ptr<const std::string> current_text() {
    auto [version, snap] = hub_.latest();
    if (!snap) return nullptr;
    if (version != text_version_ || !text_) {
      text_ = std::make_shared<const std::string>(to_json(*snap).dump());
      text_version_ = version;
    }
    return text_;
  }

  void schedule_broadcast() {
    const auto period = std::chrono::duration<double>(1.0 / settings_.publish_hz);
    timer_.expires_after(std::chrono::duration_cast<std::chrono::steady_clock::duration>(period));
    timer_.async_wait([this](ui_net::beast::error_code ec) {
      if (ec) return;
      broadcast();
      schedule_broadcast();
    });
  }

  void broadcast() {
    std::erase_if(sessions_, [](const std::weak_ptr<ui_net::WsSession>& w) { return w.expired(); });
    subscribers_ = static_cast<std::size_t>(
        std::count_if(sessions_.begin(), sessions_.end(), [](const auto& w) {
          auto s = w.lock();
          return s && s->open();
        }));
    if (sessions_.empty()) return;
    auto text = current_text();
    if (!text || text_version_ == sent_version_) return;
    sent_version_ = text_version_;
    for (auto& w : sessions_)
      if (auto s = w.lock()) s->push_snapshot(text);
  }

  SnapshotHub& hub_;
  OperatorConsole& console_;
  UiSettings settings_;
  ui_net::asio::io_context ioc_;
  ui_net::tcp::acceptor acceptor_;
  ui_net::asio::steady_timer timer_;
  std::vector<std::weak_ptr<ui_net::WsSession>> sessions_;
  std::shared_ptr<const std::string> text_;
  std::uint64_t text_version_ = 0;
  std::uint64_t sent_version_ = 0;
  std::atomic<std::size_t> subscribers_{0};
  std::atomic<bool> stopped_{false};
  int port_ = 0;
  std::thread thread_;
};

}  // namespace sslai
