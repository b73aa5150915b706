#include "socsim/harness.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include <deque>
#include <functional>
#include <map>
#include <random>
#include <set>

#include "socsim/eventgen.hpp"
#include "socsim/mirror.hpp"
#include "socsim/session.hpp"

namespace socsim::harness {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using Clock = std::chrono::steady_clock;

namespace {

double wall_ms() {
  return std::chrono::duration<double, std::milli>(std::chrono::system_clock::now().time_since_epoch()).count();
}

Clock::duration seconds(double s) {
  return std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(s));
}

class HarnessClient : public std::enable_shared_from_this<HarnessClient> {
 public:
  HarnessClient(net::io_context& ioc, const Endpoint& server, ScenarioActor actor,
                ClientTranscript& transcript, const ScenarioScript& script, std::uint64_t seed)
      : server_(server),
        actor_(std::move(actor)),
        transcript_(transcript),
        script_(script),
        resolver_(ioc),
        ws_(ioc),
        heartbeat_(ioc),
        chat_(ioc),
        rng_(seed) {}

  void connect() {
    Json hello{{"displayName", actor_.displayName}, {"role", to_string(actor_.role)}};
    if (actor_.region) hello["region"] = *actor_.region;
    if (actor_.role == Role::teacher) hello["teacherToken"] = script_.teacherToken;
    queue(Json{{"kind", "hello"}, {"payload", hello}});

    resolver_.async_resolve(server_.host, std::to_string(server_.port),
                            [self = shared_from_this()](beast::error_code ec, tcp::resolver::results_type results) {
                              if (ec) return self->fault("resolve", ec);
                              beast::get_lowest_layer(self->ws_).async_connect(
                                  results, beast::bind_front_handler(&HarnessClient::on_connect, self));
                            });
  }

  // Sends a scripted command after resolving placeholders.
  void perform(Json command, std::size_t step_index) {
    if (closing_ || !connected_) {
      transcript_.faults.push_back("step " + std::to_string(step_index) + ": client not connected");
      return;
    }
    Json& payload = command["payload"];
    if (payload.is_object() && payload.contains("eventId") && payload.at("eventId").is_string()) {
      auto id = resolve(payload.at("eventId").get<std::string>());
      if (!id) {
        transcript_.faults.push_back("step " + std::to_string(step_index) + ": cannot resolve " +
                                     payload.at("eventId").get<std::string>());
        return;
      }
      payload["eventId"] = *id;
    }
    queue(std::move(command));
  }

  void stop_load() {
    load_active_ = false;
    chat_.cancel();
  }

  void close() {
    closing_ = true;
    heartbeat_.cancel();
    chat_.cancel();
    if (!connected_) {
      resolver_.cancel();
      beast::error_code ec;
      beast::get_lowest_layer(ws_).socket().close(ec);
      return;
    }
    if (writing_) {
      close_after_write_ = true;
      return;
    }
    ws_.async_close(websocket::close_code::normal, [self = shared_from_this()](beast::error_code) {});
  }

 private:
  void fault(const char* what, const beast::error_code& ec) {
    if (closing_) return;
    transcript_.faults.push_back(std::string(what) + ": " + ec.message());
  }

  void on_connect(beast::error_code ec, const tcp::endpoint&) {
    if (ec) return fault("connect", ec);
    beast::get_lowest_layer(ws_).socket().set_option(tcp::no_delay(true), ec);
    ws_.text(true);
    ws_.async_handshake(server_.host, "/ws",
                        beast::bind_front_handler(&HarnessClient::on_handshake, shared_from_this()));
  }

  void on_handshake(beast::error_code ec) {
    if (ec) return fault("handshake", ec);
    connected_ = true;
    read_next();
    if (!out_.empty()) write_next();
    schedule_heartbeat();
  }

  void queue(Json command) {
    command["seq"] = ++client_seq_;
    out_.push_back(command.dump());
    if (connected_ && !writing_) write_next();
  }

  void write_next() {
    writing_ = true;
    ws_.async_write(net::buffer(out_.front()),
                    [self = shared_from_this()](beast::error_code ec, std::size_t) {
                      self->writing_ = false;
                      if (ec) return self->fault("write", ec);
                      self->out_.pop_front();
                      if (!self->out_.empty()) {
                        self->write_next();
                      } else if (self->close_after_write_) {
                        self->ws_.async_close(websocket::close_code::normal, [self](beast::error_code) {});
                      }
                    });
  }

  void read_next() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return self->fault("read", ec);
      ReceivedFrame frame{wall_ms(), beast::buffers_to_string(self->buffer_.data())};
      self->buffer_.consume(self->buffer_.size());
      self->on_frame(frame.text);
      self->transcript_.frames.push_back(std::move(frame));
      self->read_next();
    });
  }

  void on_frame(const std::string& text) {
    Json frame = Json::parse(text, nullptr, false);
    if (frame.is_discarded()) return;
    const bool first_snapshot = !mirror_.joined() && frame.value("kind", "") == "snapshot";
    mirror_.apply(frame);
    if (first_snapshot) schedule_chat(true);
    if (frame.value("kind", "") == "event.new") maybe_triage(frame.at("payload").at("event"));
  }

  void maybe_triage(const Json& event) {
    if (!load_active_ || closing_ || actor_.role != Role::student) return;
    if (script_.swarm.triageProbability <= 0 || event.value("region", "") != mirror_.region().value_or("")) return;
    std::bernoulli_distribution triage(script_.swarm.triageProbability);
    if (!triage(rng_)) return;
    std::bernoulli_distribution escalate(0.5);
    const char* decision = escalate(rng_) ? "escalated" : "dismissed";
    queue(Json{{"kind", "event.triage"}, {"payload", {{"eventId", event.at("id")}, {"decision", decision}}}});
  }

  void schedule_heartbeat() {
    heartbeat_.expires_after(kHeartbeatInterval);
    heartbeat_.async_wait([self = shared_from_this()](beast::error_code ec) {
      if (ec || self->closing_) return;
      self->queue(Json{{"kind", "heartbeat"}, {"payload", Json::object()}});
      self->schedule_heartbeat();
    });
  }

  void schedule_chat(bool first) {
    const double rate = script_.swarm.chatRatePerStudentPerMinute;
    if (actor_.role != Role::student || rate <= 0 || !load_active_ || !is_swarm()) return;
    const double period = 60.0 / rate;
    double wait = period;
    if (first) wait = std::uniform_real_distribution<double>(0.0, period)(rng_);
    chat_.expires_after(seconds(wait));
    chat_.async_wait([self = shared_from_this()](beast::error_code ec) {
      if (ec || self->closing_ || !self->load_active_) return;
      if (auto region = self->mirror_.region()) {
        const std::string body = "note from " + self->actor_.ref + " #" + std::to_string(++self->chats_sent_);
        self->queue(Json{{"kind", "chat.send"}, {"payload", {{"channel", *region}, {"body", body}}}});
      }
      self->schedule_chat(false);
    });
  }

  bool is_swarm() const {
    for (const auto& a : script_.actors) {
      if (a.ref == actor_.ref) return false;
    }
    return true;
  }

  std::optional<EventId> resolve(const std::string& placeholder) {
    const auto& events = mirror_.events();
    if (placeholder == "$latest") {
      for (auto it = events.rbegin(); it != events.rend(); ++it) {
        if (!it->second.value("deleted", false)) return it->first;
      }
      return std::nullopt;
    }
    if (placeholder == "$escalated") {
      for (const auto& [id, e] : events) {
        if (e.value("deleted", false) || targeted_.count(id)) continue;
        if (e.value("triageState", "") == "escalated" && e.value("verdict", "") == "pending") {
          targeted_.insert(id);
          return id;
        }
      }
    }
    return std::nullopt;
  }

  const Endpoint& server_;
  ScenarioActor actor_;
  ClientTranscript& transcript_;
  const ScenarioScript& script_;
  tcp::resolver resolver_;
  websocket::stream<beast::tcp_stream> ws_;
  net::steady_timer heartbeat_;
  net::steady_timer chat_;
  beast::flat_buffer buffer_;
  std::deque<std::string> out_;
  protocol::ClientMirror mirror_;
  std::mt19937_64 rng_;
  std::set<EventId> targeted_;
  std::int64_t client_seq_ = 0;
  std::size_t chats_sent_ = 0;
  bool connected_ = false;
  bool writing_ = false;
  bool closing_ = false;
  bool close_after_write_ = false;
  bool load_active_ = true;
};

class ExportFetch : public std::enable_shared_from_this<ExportFetch> {
 public:
  using Done = std::function<void(Json, std::optional<std::string>)>;

  ExportFetch(net::io_context& ioc, const Endpoint& server, std::string token, Done done)
      : server_(server), resolver_(ioc), stream_(ioc), done_(std::move(done)) {
    req_.method(http::verb::get);
    req_.target("/api/export");
    req_.version(11);
    req_.set(http::field::host, server_.host);
    req_.set("X-Teacher-Token", token);
  }

  void run() {
    resolver_.async_resolve(server_.host, std::to_string(server_.port),
                            [self = shared_from_this()](beast::error_code ec, tcp::resolver::results_type r) {
                              if (ec) return self->finish("resolve: " + ec.message());
                              self->stream_.expires_after(std::chrono::seconds(30));
                              self->stream_.async_connect(r, [self](beast::error_code ec, const tcp::endpoint&) {
                                if (ec) return self->finish("connect: " + ec.message());
                                self->send();
                              });
                            });
  }

 private:
  void send() {
    http::async_write(stream_, req_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return self->finish("write: " + ec.message());
      http::async_read(self->stream_, self->buffer_, self->res_,
                       [self](beast::error_code ec, std::size_t) {
                         if (ec) return self->finish("read: " + ec.message());
                         if (self->res_.result() != http::status::ok) {
                           return self->finish("export returned HTTP " +
                                               std::to_string(self->res_.result_int()));
                         }
                         Json doc = Json::parse(self->res_.body(), nullptr, false);
                         if (doc.is_discarded()) return self->finish("export is not JSON");
                         self->done_(std::move(doc), std::nullopt);
                         beast::error_code ignored;
                         self->stream_.socket().shutdown(tcp::socket::shutdown_both, ignored);
                       });
    });
  }

  void finish(std::string problem) { done_(nullptr, std::move(problem)); }

  const Endpoint& server_;
  tcp::resolver resolver_;
  beast::tcp_stream stream_;
  beast::flat_buffer buffer_;
  http::request<http::empty_body> req_;
  http::response<http::string_body> res_;
  Done done_;
};

}  // namespace

RunTranscript run_scenario(const ScenarioScript& script, const Endpoint& server) {
  if (auto issues = validate_scenario(script); !issues.empty()) {
    fail(ErrorCode::invalid, "scenario: " + issues.front());
  }
  net::io_context ioc{1};
  RunTranscript run;
  const auto actors = expand_actors(script);
  run.clients.resize(actors.size());

  std::map<std::string, std::shared_ptr<HarnessClient>> clients;
  for (std::size_t i = 0; i < actors.size(); ++i) {
    run.clients[i].ref = actors[i].ref;
    run.clients[i].role = actors[i].role;
    const std::uint64_t seed = splitmix64(script.seed ^ splitmix64(i + 1));
    clients[actors[i].ref] =
        std::make_shared<HarnessClient>(ioc, server, actors[i], run.clients[i], script, seed);
  }

  std::vector<std::unique_ptr<net::steady_timer>> timers;
  const auto t0 = Clock::now();
  auto at = [&](double offset, std::function<void()> fn) {
    auto& timer = *timers.emplace_back(std::make_unique<net::steady_timer>(ioc, t0 + seconds(offset)));
    timer.async_wait([fn = std::move(fn)](beast::error_code ec) {
      if (!ec) fn();
    });
  };

  for (const auto& actor : actors) {
    auto client = clients.at(actor.ref);
    at(actor.joinAt, [client] { client->connect(); });
  }
  for (std::size_t i = 0; i < script.steps.size(); ++i) {
    const auto& step = script.steps[i];
    auto client = clients.at(step.actor);
    at(step.at, [client, command = step.command, i] { client->perform(command, i); });
  }

  bool finishing = false;
  auto close_all = [&] {
    finishing = true;
    for (auto& t : timers) t->cancel();
    for (auto& [_, client] : clients) client->close();
  };
  at(script.durationSeconds, [&] {
    for (auto& [_, client] : clients) client->stop_load();
    std::make_shared<ExportFetch>(ioc, server, script.teacherToken,
                                  [&](Json doc, std::optional<std::string> problem) {
                                    if (problem) run.faults.push_back("export: " + *problem);
                                    run.serverExport = std::move(doc);
                                    const double now = std::chrono::duration<double>(Clock::now() - t0).count();
                                    at(now + script.quiesceSeconds, close_all);
                                  })
        ->run();
  });
  // In case the export request or a close handshake hangs.
  net::steady_timer backstop(ioc, t0 + seconds(script.durationSeconds + script.quiesceSeconds + 30.0));
  backstop.async_wait([&](beast::error_code ec) {
    if (ec) return;
    run.faults.push_back("run did not finish in time");
    ioc.stop();
  });

  // Every pending operation holds its client, so the run is over once only
  // the map does.
  while (ioc.run_one() > 0) {
    if (!finishing) continue;
    bool busy = false;
    for (const auto& [_, client] : clients) busy |= client.use_count() > 1;
    if (!busy) break;
  }
  return run;
}

Endpoint parse_endpoint(const std::string& text) {
  Endpoint e;
  std::string port = text;
  if (auto colon = text.rfind(':'); colon != std::string::npos) {
    e.host = text.substr(0, colon);
    port = text.substr(colon + 1);
  }
  if (auto scheme = e.host.find("//"); scheme != std::string::npos) e.host = e.host.substr(scheme + 2);
  try {
    const int p = std::stoi(port);
    if (p < 1 || p > 65535) throw std::out_of_range("port");
    e.port = static_cast<unsigned short>(p);
  } catch (const std::exception&) {
    fail(ErrorCode::invalid, "bad server endpoint " + text);
  }
  return e;
}

}  // namespace socsim::harness
