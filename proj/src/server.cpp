#include "socsim/server.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include <deque>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "socsim/export.hpp"
#include "socsim/protocol.hpp"

#ifndef SOCSIM_DEFAULT_WEB_ROOT
#define SOCSIM_DEFAULT_WEB_ROOT "web"
#endif

namespace socsim {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

namespace {

constexpr auto kTickPeriod = std::chrono::milliseconds(100);
constexpr auto kSweepPeriod = std::chrono::seconds(1);
constexpr int kMaxProtocolErrors = 3;
constexpr std::size_t kMaxQueuedFrames = 20000;
constexpr std::size_t kMaxInboundFrame = 64 * 1024;

constexpr const char* kFallbackPage = R"(<!doctype html>
<html><head><meta charset="utf-8"><title>SOC exercise</title></head>
<body>
<h1>SOC exercise server</h1>
<p>The web client is not installed. Point <code>--web-root</code> at its build output.</p>
<p>Protocol endpoint: <code>/ws</code>. Health: <a href="/healthz">/healthz</a>.</p>
</body></html>
)";

std::string content_type_for(const std::string& path) {
  static const std::map<std::string, std::string> types{
      {".html", "text/html; charset=utf-8"}, {".js", "text/javascript"},
      {".css", "text/css"},                  {".json", "application/json"},
      {".svg", "image/svg+xml"},             {".png", "image/png"},
      {".ico", "image/x-icon"},              {".txt", "text/plain; charset=utf-8"}};
  const auto dot = path.rfind('.');
  if (dot != std::string::npos) {
    if (auto it = types.find(path.substr(dot)); it != types.end()) return it->second;
  }
  return "application/octet-stream";
}

std::optional<std::string> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

}  // namespace

class WsSession;

struct Server::Impl {
  Impl(ExerciseConfig cfg, TemplateCatalog catalog)
      : config(std::move(cfg)),
        exercise(to_settings(config), std::move(catalog), now_utc()),
        started(std::chrono::steady_clock::now()) {}

  void accept();
  void schedule_tick();
  void schedule_sweep();
  void shutdown();

  void on_message(const std::shared_ptr<WsSession>& ws, const std::string& text);
  void on_disconnect(const std::shared_ptr<WsSession>& ws);
  void commit(const AuditEntry& entry, const std::shared_ptr<WsSession>& origin);
  void deliver(const protocol::Outbound& frame);
  void send_error(const std::shared_ptr<WsSession>& ws, const protocol::ProtocolError& error);

  http::response<http::string_body> handle_http(const http::request<http::string_body>& req);

  ExerciseConfig config;
  net::io_context ioc{1};
  tcp::acceptor acceptor{ioc};
  net::steady_timer tick_timer{ioc};
  net::steady_timer sweep_timer{ioc};
  Exercise exercise;
  std::chrono::steady_clock::time_point started;
  std::map<ClientId, std::shared_ptr<WsSession>> connections;
  std::vector<std::weak_ptr<WsSession>> sockets;
  bool stopping = false;
};

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(Server::Impl& server, tcp::socket socket) : server_(server), ws_(std::move(socket)) {}

  void start(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.read_message_max(kMaxInboundFrame);
    ws_.text(true);
    ws_.async_accept(req, beast::bind_front_handler(&WsSession::on_accept, shared_from_this()));
  }

  void send(std::string text) {
    if (closing_) return;
    queue_.push_back(std::move(text));
    if (queue_.size() > kMaxQueuedFrames) {
      // A reader this far behind cannot converge; drop it rather than grow.
      close_now();
      return;
    }
    if (queue_.size() == 1 && accepted_) write_next();
  }

  void close_after_flush() {
    close_pending_ = true;
    if (queue_.empty() && accepted_) close_graceful();
  }

  void close_now() {
    closing_ = true;
    beast::error_code ec;
    beast::get_lowest_layer(ws_).socket().shutdown(tcp::socket::shutdown_both, ec);
    beast::get_lowest_layer(ws_).socket().close(ec);
  }

  std::optional<ClientId> client;
  protocol::FrameSequencer seq;
  int protocol_errors = 0;

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return;
    accepted_ = true;
    if (!queue_.empty()) write_next();
    read_next();
  }

  void read_next() {
    ws_.async_read(buffer_, beast::bind_front_handler(&WsSession::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      closing_ = true;
      server_.on_disconnect(shared_from_this());
      return;
    }
    std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    server_.on_message(shared_from_this(), text);
    if (!closing_) read_next();
  }

  void write_next() {
    ws_.async_write(net::buffer(queue_.front()),
                    beast::bind_front_handler(&WsSession::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    if (ec) {
      close_now();
      return;
    }
    queue_.pop_front();
    if (!queue_.empty()) {
      write_next();
    } else if (close_pending_) {
      close_graceful();
    }
  }

  void close_graceful() {
    if (closing_) return;
    closing_ = true;
    ws_.async_close(websocket::close_code::policy_error,
                    [self = shared_from_this()](beast::error_code) {});
  }

  Server::Impl& server_;
  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  std::deque<std::string> queue_;
  bool accepted_ = false;
  bool closing_ = false;
  bool close_pending_ = false;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(Server::Impl& server, tcp::socket socket) : server_(server), stream_(std::move(socket)) {}

  void run() { read_next(); }

 private:
  void read_next() {
    req_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_,
                     beast::bind_front_handler(&HttpSession::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
      return;
    }
    if (websocket::is_upgrade(req_)) {
      if (req_.target() == "/ws") {
        stream_.expires_never();
        auto ws = std::make_shared<WsSession>(server_, stream_.release_socket());
        server_.sockets.push_back(ws);
        ws->start(std::move(req_));
        return;
      }
    }
    auto res = std::make_shared<http::response<http::string_body>>(server_.handle_http(req_));
    res->keep_alive(req_.keep_alive());
    res->prepare_payload();
    http::async_write(stream_, *res,
                      [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
                        if (ec || !res->keep_alive()) {
                          self->stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
                          return;
                        }
                        self->read_next();
                      });
  }

  Server::Impl& server_;
  beast::tcp_stream stream_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
};

void Server::Impl::accept() {
  acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
    if (ec) {
      if (!stopping) accept();
      return;
    }
    socket.set_option(tcp::no_delay(true), ec);
    std::make_shared<HttpSession>(*this, std::move(socket))->run();
    accept();
  });
}

void Server::Impl::schedule_tick() {
  tick_timer.expires_after(kTickPeriod);
  tick_timer.async_wait([this](beast::error_code ec) {
    if (ec || stopping) return;
    for (const auto& entry : exercise.tick(now_utc())) commit(entry, nullptr);
    schedule_tick();
  });
}

void Server::Impl::schedule_sweep() {
  sweep_timer.expires_after(kSweepPeriod);
  sweep_timer.async_wait([this](beast::error_code ec) {
    if (ec || stopping) return;
    for (const auto& entry : exercise.sweep_presence(now_utc())) {
      const auto id = entry.payload.at("clientId").get<std::string>();
      if (auto it = connections.find(id); it != connections.end()) {
        auto ws = it->second;
        connections.erase(it);
        ws->close_now();
      }
      commit(entry, nullptr);
    }
    std::erase_if(sockets, [](const auto& w) { return w.expired(); });
    schedule_sweep();
  });
}

void Server::Impl::shutdown() {
  stopping = true;
  beast::error_code ec;
  acceptor.close(ec);
  tick_timer.cancel();
  sweep_timer.cancel();
  for (auto& weak : sockets) {
    if (auto ws = weak.lock()) ws->close_now();
  }
  connections.clear();
  ioc.stop();
}

void Server::Impl::send_error(const std::shared_ptr<WsSession>& ws, const protocol::ProtocolError& error) {
  ws->send(protocol::encode_error(ws->seq.next(), error, now_utc()));
}

void Server::Impl::deliver(const protocol::Outbound& frame) {
  auto it = connections.find(frame.to);
  if (it == connections.end()) return;
  it->second->send(protocol::encode_frame(it->second->seq.next(), frame));
}

void Server::Impl::commit(const AuditEntry& entry, const std::shared_ptr<WsSession>& origin) {
  for (const auto& frame : protocol::plan_fanout(exercise, entry)) deliver(frame);
  if (entry.action != AuditAction::endgame || !config.exportPath) return;
  if (auto problem = write_export(export_transcript(exercise, config), *config.exportPath)) {
    std::cerr << "export failed: " << *problem << '\n';
    if (origin) send_error(origin, {ErrorCode::precondition, "export failed: " + *problem, std::nullopt});
  }
}

void Server::Impl::on_message(const std::shared_ptr<WsSession>& ws, const std::string& text) {
  const Timestamp now = now_utc();
  const ClientSession* session = ws->client ? exercise.sessions().find(*ws->client) : nullptr;
  if (session != nullptr && !session->connected) return;  // timed out; close is in flight

  auto decoded = protocol::decode_client_frame(text, session);
  if (auto* error = std::get_if<protocol::ProtocolError>(&decoded)) {
    send_error(ws, *error);
    if (++ws->protocol_errors >= kMaxProtocolErrors) ws->close_after_flush();
    return;
  }
  ws->protocol_errors = 0;
  const auto& cmd = std::get<protocol::DecodedCommand>(decoded);

  try {
    if (const auto* hello = std::get_if<Hello>(&cmd.command)) {
      auto joined = exercise.join(*hello, now);
      const ClientId id = joined.session.clientId;
      ws->client = id;
      connections[id] = ws;
      deliver({id, "snapshot", protocol::snapshot_for(exercise, id, now), now, joined.entry.seq});
      commit(joined.entry, ws);
      return;
    }
    // Any traffic proves liveness, not just heartbeat frames.
    exercise.heartbeat(*ws->client, now);
    for (const auto& entry : protocol::dispatch(exercise, *ws->client, cmd.command, now)) {
      commit(entry, ws);
    }
  } catch (const Error& e) {
    send_error(ws, {e.code(), e.what(), cmd.clientSeq});
  }
}

void Server::Impl::on_disconnect(const std::shared_ptr<WsSession>& ws) {
  if (stopping || !ws->client) return;
  auto it = connections.find(*ws->client);
  if (it == connections.end() || it->second != ws) return;
  connections.erase(it);
  if (auto entry = exercise.leave(*ws->client, now_utc())) commit(*entry, nullptr);
}

http::response<http::string_body> Server::Impl::handle_http(const http::request<http::string_body>& req) {
  http::response<http::string_body> res{http::status::ok, req.version()};
  res.set(http::field::server, "socsim");
  auto reply = [&](http::status status, const std::string& type, std::string body) {
    res.result(status);
    res.set(http::field::content_type, type);
    res.body() = std::move(body);
    return res;
  };
  auto reply_json = [&](http::status status, const Json& body) {
    return reply(status, "application/json", body.dump());
  };

  if (req.method() != http::verb::get && req.method() != http::verb::head) {
    return reply_json(http::status::method_not_allowed, Json{{"error", "method not allowed"}});
  }
  std::string target(req.target());
  if (auto q = target.find('?'); q != std::string::npos) target.resize(q);

  if (target == "/healthz") {
    const auto up = std::chrono::duration_cast<std::chrono::seconds>(std::chrono::steady_clock::now() - started);
    return reply_json(http::status::ok, Json{{"status", "ok"}, {"uptimeSeconds", up.count()}});
  }
  if (target == "/api/export") {
    std::string given(req["X-Teacher-Token"]);
    if (given.empty()) {
      const std::string auth(req[http::field::authorization]);
      if (auth.rfind("Bearer ", 0) == 0) given = auth.substr(7);
    }
    if (!same_secret(given, config.teacherToken)) {
      return reply_json(http::status::forbidden, Json{{"error", "forbidden"}});
    }
    return reply_json(http::status::ok, export_transcript(exercise, config));
  }

  if (target.find("..") != std::string::npos || target.find('\\') != std::string::npos) {
    return reply_json(http::status::not_found, Json{{"error", "not found"}});
  }
  const std::string relative = target == "/" ? "index.html" : target.substr(1);
  const std::filesystem::path root = config.webRoot.value_or(SOCSIM_DEFAULT_WEB_ROOT);
  if (!relative.empty() && relative.back() != '/') {
    if (auto body = read_file(root / relative)) return reply(http::status::ok, content_type_for(relative), *body);
  }
  if (target == "/") return reply(http::status::ok, "text/html; charset=utf-8", kFallbackPage);
  return reply_json(http::status::not_found, Json{{"error", "not found"}});
}

Server::Server(ExerciseConfig config, TemplateCatalog catalog)
    : impl_(std::make_shared<Impl>(std::move(config), std::move(catalog))) {}

Server::~Server() = default;

unsigned short Server::start() {
  const auto address = net::ip::make_address(impl_->config.bindAddress);
  const tcp::endpoint endpoint(address, static_cast<unsigned short>(impl_->config.port));
  auto& acceptor = impl_->acceptor;
  acceptor.open(endpoint.protocol());
  acceptor.set_option(net::socket_base::reuse_address(true));
  acceptor.bind(endpoint);
  acceptor.listen(net::socket_base::max_listen_connections);
  impl_->accept();
  impl_->schedule_tick();
  impl_->schedule_sweep();
  return acceptor.local_endpoint().port();
}

void Server::run() { impl_->ioc.run(); }

void Server::stop() {
  net::post(impl_->ioc, [impl = impl_.get()] { impl->shutdown(); });
}

}  // namespace socsim
