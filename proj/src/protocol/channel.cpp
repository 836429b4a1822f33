#include "protocol/channel.hpp"

#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <thread>

namespace snail::protocol {

void Channel::note(const Message& m, bool sent) {
  std::lock_guard lk(mu_);
  (sent ? sent_ : received_) += m.wire_bytes();
  if (recording_) transcript_.push_back({m.type, m.wire_bytes(), sent});
}

void Channel::send(Message m) {
  note(m, true);
  send_impl(std::move(m));
}

Message Channel::recv() {
  Message m = recv_impl();
  note(m, false);
  return m;
}

Message Channel::recv(MsgType t) {
  Message m = recv();
  if (m.type != t)
    throw ProtocolError(std::string("expected ") + msg_name(t) + ", got " + msg_name(m.type));
  return m;
}

uint64_t Channel::bytes_sent() const {
  std::lock_guard lk(mu_);
  return sent_;
}

uint64_t Channel::bytes_received() const {
  std::lock_guard lk(mu_);
  return received_;
}

void Channel::set_recording(bool on) {
  std::lock_guard lk(mu_);
  recording_ = on;
}

std::vector<TranscriptEntry> Channel::take_transcript() {
  std::lock_guard lk(mu_);
  return std::exchange(transcript_, {});
}

namespace {

using Clock = std::chrono::steady_clock;

struct Queue {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<std::pair<Message, Clock::time_point>> items;
  bool closed = false;
};

class MemoryChannel : public Channel {
 public:
  MemoryChannel(std::shared_ptr<Queue> out, std::shared_ptr<Queue> in, MemoryLinkOptions o)
      : out_(std::move(out)), in_(std::move(in)), opt_(o) {}
  ~MemoryChannel() override { close(); }

  void close() override {
    for (auto* q : {out_.get(), in_.get()}) {
      std::lock_guard lk(q->mu);
      q->closed = true;
      q->cv.notify_all();
    }
  }

 protected:
  void send_impl(Message&& m) override {
    std::unique_lock lk(out_->mu);
    out_->cv.wait(lk, [&] { return out_->closed || out_->items.size() < opt_.capacity; });
    if (out_->closed) throw ProtocolError("channel closed");
    out_->items.emplace_back(std::move(m), Clock::now() + opt_.latency);
    out_->cv.notify_all();
  }

  Message recv_impl() override {
    std::unique_lock lk(in_->mu);
    in_->cv.wait(lk, [&] { return !in_->items.empty() || in_->closed; });
    if (in_->items.empty()) throw ProtocolError("channel closed");
    const auto due = in_->items.front().second;
    if (Clock::now() < due) {
      lk.unlock();
      std::this_thread::sleep_until(due);
      lk.lock();
    }
    Message m = std::move(in_->items.front().first);
    in_->items.pop_front();
    in_->cv.notify_all();
    return m;
  }

 private:
  std::shared_ptr<Queue> out_, in_;
  MemoryLinkOptions opt_;
};

class TcpChannel : public Channel {
 public:
  explicit TcpChannel(int fd) : fd_(fd) {
    int one = 1;
    setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  }
  ~TcpChannel() override {
    close();
    ::close(fd_);
  }

  void close() override { ::shutdown(fd_, SHUT_RDWR); }

 protected:
  void send_impl(Message&& m) override {
    const auto bytes = encode_message(m);
    size_t off = 0;
    while (off < bytes.size()) {
      const ssize_t k = ::send(fd_, bytes.data() + off, bytes.size() - off, MSG_NOSIGNAL);
      if (k < 0 && errno == EINTR) continue;
      if (k <= 0) throw ProtocolError(std::string("send failed: ") + std::strerror(errno));
      off += static_cast<size_t>(k);
    }
  }

  Message recv_impl() override {
    uint8_t hdr[kMsgHeaderBytes];
    read_all(hdr, sizeof hdr);
    Message m;
    m.payload.resize(parse_header(hdr, m.type));
    read_all(m.payload.data(), m.payload.size());
    return m;
  }

 private:
  void read_all(uint8_t* p, size_t n) {
    size_t off = 0;
    while (off < n) {
      const ssize_t k = ::recv(fd_, p + off, n - off, 0);
      if (k < 0 && errno == EINTR) continue;
      if (k == 0) throw ProtocolError("connection closed by peer");
      if (k < 0) throw ProtocolError(std::string("recv failed: ") + std::strerror(errno));
      off += static_cast<size_t>(k);
    }
  }

  int fd_;
};

std::pair<std::string, std::string> split_addr(const std::string& addr) {
  const auto colon = addr.rfind(':');
  if (colon == std::string::npos) throw ProtocolError("address '" + addr + "' is not host:port");
  std::string host = addr.substr(0, colon);
  if (host.empty()) host = "127.0.0.1";
  return {host, addr.substr(colon + 1)};
}

}  // namespace

std::pair<std::unique_ptr<Channel>, std::unique_ptr<Channel>> memory_link(const MemoryLinkOptions& o) {
  auto a = std::make_shared<Queue>(), b = std::make_shared<Queue>();
  return {std::make_unique<MemoryChannel>(a, b, o), std::make_unique<MemoryChannel>(b, a, o)};
}

std::unique_ptr<Channel> tcp_connect(const std::string& addr, std::chrono::milliseconds timeout) {
  const auto [host, port] = split_addr(addr);
  const auto deadline = Clock::now() + timeout;
  std::string last_error = "timed out";
  for (;;) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    const int rc = getaddrinfo(host.c_str(), port.c_str(), &hints, &res);
    if (rc != 0) throw ProtocolError("cannot resolve " + addr + ": " + gai_strerror(rc));
    for (addrinfo* ai = res; ai; ai = ai->ai_next) {
      const int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
      if (fd < 0) continue;
      if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
        freeaddrinfo(res);
        return std::make_unique<TcpChannel>(fd);
      }
      last_error = std::strerror(errno);
      ::close(fd);
    }
    freeaddrinfo(res);
    if (Clock::now() >= deadline) throw ProtocolError("cannot connect to " + addr + ": " + last_error);
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
}

TcpListener::TcpListener(const std::string& addr) {
  const auto [host, port] = split_addr(addr);
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  const int rc = getaddrinfo(host.c_str(), port.c_str(), &hints, &res);
  if (rc != 0) throw ProtocolError("cannot resolve " + addr + ": " + gai_strerror(rc));
  fd_ = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  int one = 1;
  setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  if (fd_ < 0 || ::bind(fd_, res->ai_addr, res->ai_addrlen) != 0 || ::listen(fd_, 16) != 0) {
    const std::string err = std::strerror(errno);
    freeaddrinfo(res);
    if (fd_ >= 0) ::close(fd_);
    throw ProtocolError("cannot listen on " + addr + ": " + err);
  }
  freeaddrinfo(res);
  sockaddr_in bound{};
  socklen_t len = sizeof bound;
  getsockname(fd_, reinterpret_cast<sockaddr*>(&bound), &len);
  port_ = ntohs(bound.sin_port);
}

TcpListener::~TcpListener() {
  close();
  if (fd_ >= 0) ::close(fd_);
}

void TcpListener::close() {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

std::unique_ptr<Channel> TcpListener::accept() {
  for (;;) {
    const int fd = ::accept(fd_, nullptr, nullptr);
    if (fd >= 0) return std::make_unique<TcpChannel>(fd);
    if (errno == EINTR) continue;
    throw ProtocolError(std::string("accept failed: ") + std::strerror(errno));
  }
}

}  // namespace snail::protocol
