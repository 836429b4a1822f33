#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "protocol/session.hpp"

namespace snail::protocol {

// A generator or evaluator process. Each accepted connection starts with
// HELLO; client connections carry PARAMS and open a session, server and map
// owner connections attach to the session with the same id.
class Server {
 public:
  using Logger = std::function<void(const std::string&)>;

  Server(Role role, const std::string& listen_addr, Logger log = {});
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  uint16_t port() const;
  // Accepts until stop(); blocks.
  void run();
  void start();  // run() on a background thread
  void stop();
  uint64_t sessions_completed() const { return completed_; }

 private:
  struct Rendezvous;
  void handle(std::unique_ptr<Channel> ch);
  void run_session(std::unique_ptr<Channel> client, const SessionParams& p);

  Role role_;
  std::unique_ptr<TcpListener> listener_;
  std::shared_ptr<Rendezvous> rv_;
  Logger log_;
  std::atomic<bool> stopping_{false};
  std::atomic<uint64_t> completed_{0};
  std::thread bg_;
  std::mutex mu_;
  std::vector<std::thread> workers_;
};

// Client end of a TCP session. In split mode a map owner thread runs in the
// same process with its own connections, supplying `map_words`.
class RemoteSession {
 public:
  RemoteSession(const std::string& generator_addr, const std::string& evaluator_addr, SessionParams p,
                MapWordsFn map_words = {});
  ~RemoteSession();
  ClientSession& client() { return *client_; }
  void close();

 private:
  std::unique_ptr<Channel> gen_, eval_, m_gen_, m_eval_;
  std::unique_ptr<ClientSession> client_;
  std::thread map_owner_;
  std::exception_ptr map_failure_;
  bool closed_ = false;
};

}  // namespace snail::protocol
