#include "bigen/server.hpp"

#include <chrono>
#include <condition_variable>
#include <csignal>
#include <deque>

#include <boost/asio/signal_set.hpp>
#include <boost/asio/strand.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "bigen/io.hpp"

namespace bigen {

using nlohmann::json;

namespace {

std::shared_ptr<const std::string> serialize(const json& j) {
  return std::make_shared<const std::string>(j.dump());
}

void sendTo(const std::shared_ptr<MessageSink>& sink, const json& j, bool droppable = false) {
  if (sink) sink->send(serialize(j), droppable);
}

}  // namespace

// ---------------------------------------------------------------------------
// SessionHost
// ---------------------------------------------------------------------------

class SessionHost {
 public:
  explicit SessionHost(Session session) : session_(std::move(session)) {}

  ~SessionHost() { stop(); }

  void startDriver() { driver_ = std::thread([this] { loop(); }); }

  void stop() {
    {
      std::lock_guard lock(mutex_);
      stopping_ = true;
    }
    cv_.notify_all();
    if (driver_.joinable()) driver_.join();
  }

  void subscribe(const std::shared_ptr<MessageSink>& sink) {
    std::lock_guard lock(mutex_);
    subscribers_.push_back(sink);
  }

  // Emits the opening snapshot to the subscribers registered so far.
  void publishOpening() {
    std::lock_guard lock(mutex_);
    publish(session_.snapshot("open"));
  }

  void enqueue(json msg, const std::shared_ptr<MessageSink>& origin) {
    {
      std::lock_guard lock(mutex_);
      queue_.push_back({std::move(msg), origin});
    }
    cv_.notify_all();
  }

  std::uint64_t t() {
    std::lock_guard lock(mutex_);
    return session_.state().t();
  }

 private:
  struct Command {
    json msg;
    std::weak_ptr<MessageSink> origin;
  };

  void publish(const Snapshot& s) {
    const auto text = serialize(toJson(s));
    std::erase_if(subscribers_, [&](const std::weak_ptr<MessageSink>& w) {
      auto sink = w.lock();
      if (!sink) return true;
      sink->send(text, true);
      return false;
    });
  }

  void process(const Command& cmd) {
    auto origin = cmd.origin.lock();
    const json& msg = cmd.msg;
    const std::string type = msg.value("type", "");
    const std::string& id = session_.id();
    const std::string tag = msg.value("client_tag", "");

    if (type == "param_update") {
      try {
        const ParamPatch patch = patchFromJson(msg.value("patch", json::object()));
        auto [ack, snap] = session_.applyUpdate({patch, tag});
        sendTo(origin, ackJson(id, ack));
        publish(snap);
      } catch (const ParamError& e) {
        sendTo(origin, errorJson("parameter update rejected", e.errors, id, tag));
      }
      return;
    }

    const std::string action = msg.value("action", "");
    json ack = {{"type", "ack"}, {"action", action}, {"session", id}};
    if (!tag.empty()) ack["client_tag"] = tag;

    if (action == "pull_edges") {
      const auto& g = session_.state().graph();
      if (g.edgeCount() > session_.options().edgePullLimit) {
        sendTo(origin, errorJson("graph has " + std::to_string(g.edgeCount()) +
                                     " edges, above the pull limit of " +
                                     std::to_string(session_.options().edgePullLimit),
                                 {}, id, tag));
        return;
      }
      json edges = json::array();
      for (const auto& [u, i] : session_.edges()) edges.push_back({u, i});
      ack["t"] = session_.state().t();
      ack["counts"] = {{"users", g.userCount()}, {"items", g.itemCount()}};
      ack["edges"] = std::move(edges);
      sendTo(origin, ack);
      return;
    }
    if (action == "pull_histogram") {
      const auto& g = session_.state().graph();
      ack["t"] = session_.state().t();
      ack["histograms"] = {{"user", toJson(degreeHistogram(g, Modality::User))},
                           {"item", toJson(degreeHistogram(g, Modality::Item))}};
      sendTo(origin, ack);
      return;
    }

    try {
      const ControlAction control = parseControlAction(action);
      const double speed = msg.value("speed", 0.0);
      auto snap = session_.control(control, speed);
      ack["t"] = session_.state().t();
      ack["running"] = session_.running();
      sendTo(origin, ack);
      if (snap) publish(*snap);
    } catch (const std::exception& e) {
      sendTo(origin, errorJson(e.what(), {}, id, tag));
    }
  }

  void loop() {
    std::unique_lock lock(mutex_);
    for (;;) {
      cv_.wait(lock, [&] { return stopping_ || !queue_.empty() || session_.running(); });
      if (stopping_) return;
      while (!queue_.empty()) {
        Command cmd = std::move(queue_.front());
        queue_.pop_front();
        try {
          process(cmd);
        } catch (const std::exception& e) {
          sendTo(cmd.origin.lock(), errorJson(e.what(), {}, session_.id()));
        }
      }
      if (!session_.running()) continue;

      std::uint64_t chunk = session_.iterationsToBoundary();
      const double speed = session_.speed();
      if (speed > 0) {
        chunk = std::min<std::uint64_t>(
            chunk, std::max<std::uint64_t>(1, static_cast<std::uint64_t>(speed / 20)));
      }
      for (const auto& s : session_.advance(chunk)) publish(s);
      if (speed > 0) {
        const auto pause = std::chrono::duration<double>(static_cast<double>(chunk) / speed);
        cv_.wait_for(lock, pause, [&] { return stopping_ || !queue_.empty(); });
      }
    }
  }

  std::mutex mutex_;
  std::condition_variable cv_;
  Session session_;
  std::deque<Command> queue_;
  std::vector<std::weak_ptr<MessageSink>> subscribers_;
  bool stopping_ = false;
  std::thread driver_;
};

// ---------------------------------------------------------------------------
// SessionHub
// ---------------------------------------------------------------------------

SessionHub::SessionHub(ServerOptions options) : options_(std::move(options)) {}

SessionHub::~SessionHub() { shutdown(); }

void SessionHub::shutdown() {
  std::map<std::string, std::shared_ptr<SessionHost>> sessions;
  {
    std::lock_guard lock(mutex_);
    sessions.swap(sessions_);
  }
  for (auto& [id, host] : sessions) host->stop();
}

std::size_t SessionHub::sessionCount() const {
  std::lock_guard lock(mutex_);
  return sessions_.size();
}

std::shared_ptr<SessionHost> SessionHub::find(const std::string& id) const {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

void SessionHub::open(const json& msg, const std::shared_ptr<MessageSink>& client) {
  const std::string tag = msg.value("client_tag", "");
  GeneratorParams params;
  try {
    params = paramsFromJson(msg.value("params", json::object()));
    ensureValid(params);
  } catch (const ParamError& e) {
    sendTo(client, errorJson("session parameters rejected", e.errors, {}, tag));
    return;
  }
  SessionOptions sessionOptions = options_.session;
  if (msg.contains("every")) {
    const auto& every = msg["every"];
    if (!every.is_number_integer() || every.get<std::int64_t>() < 1) {
      sendTo(client, errorJson("every must be a positive integer", {}, {}, tag));
      return;
    }
    sessionOptions.snapshotEvery = every.get<std::uint64_t>();
  }
  std::uint64_t seed = 1;
  if (msg.contains("seed")) {
    if (!msg["seed"].is_number_unsigned()) {
      sendTo(client, errorJson("seed must be a nonnegative integer", {}, {}, tag));
      return;
    }
    seed = msg["seed"].get<std::uint64_t>();
  }

  std::shared_ptr<SessionHost> host;
  std::string id;
  {
    std::lock_guard lock(mutex_);
    if (sessions_.size() >= options_.maxSessions) {
      sendTo(client, errorJson("session limit reached", {}, {}, tag));
      return;
    }
    id = "s" + std::to_string(nextId_++);
    host = std::make_shared<SessionHost>(Session(id, params, seed, sessionOptions));
    sessions_.emplace(id, host);
  }
  host->subscribe(client);
  json ack = {{"type", "ack"},       {"action", "open"}, {"session", id},
              {"params", toJson(params)}, {"seed", seed},
              {"every", sessionOptions.snapshotEvery}};
  if (!tag.empty()) ack["client_tag"] = tag;
  sendTo(client, ack);
  host->publishOpening();
  host->startDriver();
}

void SessionHub::handle(const std::string& text, const std::shared_ptr<MessageSink>& client) {
  try {
    route(text, client);
  } catch (const std::exception& e) {
    sendTo(client, errorJson(e.what()));
  }
}

void SessionHub::route(const std::string& text, const std::shared_ptr<MessageSink>& client) {
  json msg;
  try {
    msg = json::parse(text);
  } catch (const json::parse_error& e) {
    sendTo(client, errorJson(std::string("malformed JSON: ") + e.what()));
    return;
  }
  if (!msg.is_object() || !msg.contains("type") || !msg["type"].is_string()) {
    sendTo(client, errorJson("message must be an object with a string \"type\""));
    return;
  }
  const std::string type = msg["type"];
  if (type != "control" && type != "param_update") {
    sendTo(client, errorJson("unsupported message type '" + type + "'"));
    return;
  }
  const std::string action = msg.value("action", "");
  if (type == "control" && action == "open") {
    open(msg, client);
    return;
  }

  const std::string id = msg.value("session", "");
  auto host = find(id);
  if (!host) {
    sendTo(client, errorJson("unknown session '" + id + "'"));
    if (client) client->close();
    return;
  }
  if (type == "control" && action == "subscribe") {
    host->subscribe(client);
    sendTo(client, {{"type", "ack"}, {"action", "subscribe"}, {"session", id}, {"t", host->t()}});
    return;
  }
  if (type == "control" && action == "close") {
    {
      std::lock_guard lock(mutex_);
      sessions_.erase(id);
    }
    host->stop();
    sendTo(client, {{"type", "ack"}, {"action", "close"}, {"session", id}});
    return;
  }
  host->enqueue(std::move(msg), client);
}

// ---------------------------------------------------------------------------
// WebSocket transport
// ---------------------------------------------------------------------------

namespace net = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

namespace {

class WsConnection : public MessageSink, public std::enable_shared_from_this<WsConnection> {
 public:
  WsConnection(tcp::socket&& socket, SessionHub& hub, std::size_t limit)
      : ws_(std::move(socket)), hub_(hub), limit_(limit) {}

  void run() {
    net::dispatch(ws_.get_executor(), [self = shared_from_this()] {
      self->ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
      self->ws_.async_accept([self](beast::error_code ec) {
        if (!ec) self->read();
      });
    });
  }

  void send(std::shared_ptr<const std::string> text, bool droppable) override {
    net::post(ws_.get_executor(), [self = shared_from_this(), text = std::move(text), droppable] {
      self->enqueue({std::move(text), droppable});
    });
  }

  void close() override {
    net::post(ws_.get_executor(), [self = shared_from_this()] {
      self->closing_ = true;
      if (!self->writing_) self->shutdown();
    });
  }

 private:
  struct Outgoing {
    std::shared_ptr<const std::string> text;
    bool droppable;
  };

  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return;
      const std::string text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      self->hub_.handle(text, self);
      if (!self->closing_) self->read();
    });
  }

  void enqueue(Outgoing out) {
    if (closed_) return;
    if (queue_.size() >= limit_ && out.droppable) {
      // Drop the oldest snapshot that is not in flight; order is preserved.
      const std::size_t first = writing_ ? 1 : 0;
      for (std::size_t i = first; i < queue_.size(); ++i) {
        if (queue_[i].droppable) {
          queue_.erase(queue_.begin() + static_cast<std::ptrdiff_t>(i));
          break;
        }
      }
    }
    queue_.push_back(std::move(out));
    if (!writing_) write();
  }

  void write() {
    writing_ = true;
    ws_.text(true);
    ws_.async_write(net::buffer(*queue_.front().text),
                    [self = shared_from_this()](beast::error_code ec, std::size_t) {
                      self->queue_.pop_front();
                      if (ec) {
                        self->closed_ = true;
                        self->queue_.clear();
                        self->writing_ = false;
                        return;
                      }
                      if (!self->queue_.empty()) {
                        self->write();
                      } else {
                        self->writing_ = false;
                        if (self->closing_) self->shutdown();
                      }
                    });
  }

  void shutdown() {
    if (closed_) return;
    closed_ = true;
    ws_.async_close(websocket::close_code::normal,
                    [self = shared_from_this()](beast::error_code) {});
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  SessionHub& hub_;
  std::size_t limit_;
  std::deque<Outgoing> queue_;
  bool writing_ = false;
  bool closing_ = false;
  bool closed_ = false;
};

}  // namespace

struct SteeringServer::Impl {
  net::io_context ioc{1};
  tcp::acceptor acceptor{ioc};
  std::thread thread;

  void accept(SessionHub& hub, std::size_t limit) {
    acceptor.async_accept(net::make_strand(ioc),
                          [this, &hub, limit](beast::error_code ec, tcp::socket socket) {
                            if (ec) return;
                            std::make_shared<WsConnection>(std::move(socket), hub, limit)->run();
                            accept(hub, limit);
                          });
  }
};

SteeringServer::SteeringServer(ServerOptions options)
    : options_(std::move(options)), hub_(options_), impl_(std::make_unique<Impl>()) {}

SteeringServer::~SteeringServer() { stop(); }

void SteeringServer::start() {
  const auto address = net::ip::make_address(options_.address);
  tcp::endpoint endpoint(address, options_.port);
  impl_->acceptor.open(endpoint.protocol());
  impl_->acceptor.set_option(net::socket_base::reuse_address(true));
  impl_->acceptor.bind(endpoint);
  impl_->acceptor.listen(net::socket_base::max_listen_connections);
  port_ = impl_->acceptor.local_endpoint().port();
  impl_->accept(hub_, options_.outboundLimit);
  impl_->thread = std::thread([this] { impl_->ioc.run(); });
}

void SteeringServer::stop() {
  if (!impl_) return;
  hub_.shutdown();
  impl_->ioc.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

void SteeringServer::runUntilSignal() {
  std::mutex mutex;
  std::condition_variable cv;
  bool signalled = false;
  net::signal_set signals(impl_->ioc, SIGINT, SIGTERM);
  signals.async_wait([&](beast::error_code, int) {
    std::lock_guard lock(mutex);
    signalled = true;
    cv.notify_all();
  });
  {
    std::unique_lock lock(mutex);
    cv.wait(lock, [&] { return signalled; });
  }
  stop();
}

}  // namespace bigen
