#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "bigen/session.hpp"

namespace bigen {

struct ServerOptions {
  std::string address = "127.0.0.1";
  std::uint16_t port = 8765;  // 0 picks a free port
  std::size_t maxSessions = 16;
  SessionOptions session;
  // Per-client outbound queue bound; beyond it the oldest queued snapshots
  // are dropped (acks and errors are never dropped).
  std::size_t outboundLimit = 64;
};

// Outbound half of one client connection.
class MessageSink {
 public:
  virtual ~MessageSink() = default;
  // `droppable` marks snapshots, which may be discarded under backpressure.
  virtual void send(std::shared_ptr<const std::string> text, bool droppable) = 0;
  // Flushes queued messages, then closes the channel.
  virtual void close() = 0;
};

class SessionHost;

// Routes protocol messages to sessions. Each session runs its own driver
// thread that applies queued commands at iteration boundaries, advances the
// generator and fans snapshots out to subscribers. Transport independent.
class SessionHub {
 public:
  explicit SessionHub(ServerOptions options);
  ~SessionHub();

  SessionHub(const SessionHub&) = delete;
  SessionHub& operator=(const SessionHub&) = delete;

  void handle(const std::string& text, const std::shared_ptr<MessageSink>& client);
  std::size_t sessionCount() const;
  // Stops and joins every session driver.
  void shutdown();

 private:
  void route(const std::string& text, const std::shared_ptr<MessageSink>& client);
  std::shared_ptr<SessionHost> find(const std::string& id) const;
  void open(const nlohmann::json& msg, const std::shared_ptr<MessageSink>& client);

  ServerOptions options_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<SessionHost>> sessions_;
  std::uint64_t nextId_ = 1;
};

// WebSocket front end for SessionHub (text frames, one JSON object each).
class SteeringServer {
 public:
  explicit SteeringServer(ServerOptions options);
  ~SteeringServer();

  // Binds and starts serving on a background thread. Throws on bind failure.
  void start();
  std::uint16_t port() const { return port_; }
  void stop();
  // Blocks until SIGINT or SIGTERM, then stops.
  void runUntilSignal();

  SessionHub& hub() { return hub_; }

 private:
  struct Impl;
  ServerOptions options_;
  SessionHub hub_;
  std::unique_ptr<Impl> impl_;
  std::uint16_t port_ = 0;
};

}  // namespace bigen
