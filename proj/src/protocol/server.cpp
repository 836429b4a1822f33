#include "protocol/server.hpp"

#include <condition_variable>
#include <map>

namespace snail::protocol {

struct Server::Rendezvous {
  std::mutex mu;
  std::condition_variable cv;
  std::map<std::pair<uint64_t, Role>, std::unique_ptr<Channel>> waiting;

  void put(uint64_t sid, Role r, std::unique_ptr<Channel> ch) {
    std::lock_guard lk(mu);
    waiting[{sid, r}] = std::move(ch);
    cv.notify_all();
  }

  std::unique_ptr<Channel> take(uint64_t sid, Role r, std::chrono::seconds timeout) {
    std::unique_lock lk(mu);
    const auto key = std::make_pair(sid, r);
    if (!cv.wait_for(lk, timeout, [&] { return waiting.count(key) > 0; }))
      throw ProtocolError(std::string("no ") + role_name(r) + " joined session " + std::to_string(sid));
    auto ch = std::move(waiting[key]);
    waiting.erase(key);
    return ch;
  }
};

Server::Server(Role role, const std::string& listen_addr, Logger log)
    : role_(role), listener_(std::make_unique<TcpListener>(listen_addr)), rv_(std::make_shared<Rendezvous>()),
      log_(std::move(log)) {
  if (role != Role::kGenerator && role != Role::kEvaluator) throw ProtocolError("servers are generators or evaluators");
}

Server::~Server() { stop(); }

uint16_t Server::port() const { return listener_->port(); }

void Server::run() {
  while (!stopping_) {
    std::unique_ptr<Channel> ch;
    try {
      ch = listener_->accept();
    } catch (const ProtocolError&) {
      if (stopping_) break;
      throw;
    }
    std::lock_guard lk(mu_);
    workers_.emplace_back([this, c = std::move(ch)]() mutable {
      try {
        handle(std::move(c));
      } catch (const std::exception& e) {
        if (log_) log_(std::string(role_name(role_)) + ": " + e.what());
      }
    });
  }
}

void Server::start() {
  bg_ = std::thread([this] {
    try {
      run();
    } catch (const std::exception& e) {
      if (log_) log_(e.what());
    }
  });
}

void Server::stop() {
  if (stopping_.exchange(true)) return;
  listener_->close();
  if (bg_.joinable()) bg_.join();
  std::vector<std::thread> w;
  {
    std::lock_guard lk(mu_);
    w.swap(workers_);
  }
  for (auto& t : w) t.join();
}

void Server::handle(std::unique_ptr<Channel> ch) {
  const Message m = ch->recv(MsgType::kHello);
  const Hello h = Hello::from_payload(m.payload);
  if (h.role == Role::kClient) {
    const SessionParams p = SessionParams::from_payload(ch->recv(MsgType::kParams).payload);
    if (p.session_id != h.session_id) throw ProtocolError("PARAMS session id does not match HELLO");
    run_session(std::move(ch), p);
    return;
  }
  const bool ok = (role_ == Role::kEvaluator && h.role == Role::kGenerator) || h.role == Role::kMapOwner;
  if (!ok) throw ProtocolError(std::string("unexpected ") + role_name(h.role) + " connection");
  rv_->put(h.session_id, h.role, std::move(ch));
}

void Server::run_session(std::unique_ptr<Channel> client, const SessionParams& p) {
  const auto timeout = std::chrono::seconds(30);
  const CircuitSpec spec = sil_circuit(p);
  std::unique_ptr<Channel> peer, map_owner;
  if (role_ == Role::kGenerator) {
    if (p.evaluator_addr.empty()) throw ProtocolError("PARAMS lacks the evaluator address");
    peer = tcp_connect(p.evaluator_addr);
    peer->send({MsgType::kHello, Hello{Role::kGenerator, p.session_id}.to_payload()});
  } else {
    peer = rv_->take(p.session_id, Role::kGenerator, timeout);
  }
  if (p.mode == Mode::kSplit) map_owner = rv_->take(p.session_id, Role::kMapOwner, timeout);
  if (log_) log_(std::string(role_name(role_)) + ": session " + std::to_string(p.session_id) + " open");
  const ServerLinks links{client.get(), peer.get(), map_owner.get()};
  const uint64_t o = role_ == Role::kGenerator ? serve_generator(p, spec, links) : serve_evaluator(p, spec, links);
  ++completed_;
  if (log_)
    log_(std::string(role_name(role_)) + ": session " + std::to_string(p.session_id) + " closed after " +
         std::to_string(o) + " invocations");
}

RemoteSession::RemoteSession(const std::string& generator_addr, const std::string& evaluator_addr, SessionParams p,
                             MapWordsFn map_words) {
  p.evaluator_addr = evaluator_addr;
  p.validate();
  gen_ = tcp_connect(generator_addr);
  eval_ = tcp_connect(evaluator_addr);
  client_ = std::make_unique<ClientSession>(p, *gen_, *eval_);
  client_->open();
  if (p.mode == Mode::kSplit) {
    if (!map_words) throw ProtocolError("split mode needs map owner data");
    m_gen_ = tcp_connect(generator_addr);
    m_eval_ = tcp_connect(evaluator_addr);
    const Hello h{Role::kMapOwner, p.session_id};
    m_gen_->send({MsgType::kHello, h.to_payload()});
    m_eval_->send({MsgType::kHello, h.to_payload()});
    const CircuitSpec spec = client_->spec();
    map_owner_ = std::thread([this, p, spec, map_words] {
      try {
        serve_map_owner(p, spec, *m_gen_, *m_eval_, map_words);
      } catch (...) {
        map_failure_ = std::current_exception();
      }
    });
  }
}

RemoteSession::~RemoteSession() {
  try {
    close();
  } catch (...) {
  }
}

void RemoteSession::close() {
  if (closed_) return;
  closed_ = true;
  client_->close();
  if (map_owner_.joinable()) map_owner_.join();
  if (map_failure_) std::rethrow_exception(map_failure_);
}

}  // namespace snail::protocol
