#pragma once

#include <chrono>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "protocol/messages.hpp"

namespace snail::protocol {

struct TranscriptEntry {
  MsgType type{};
  uint64_t bytes = 0;  // framed size
  bool sent = false;
  friend bool operator==(const TranscriptEntry&, const TranscriptEntry&) = default;
};

// Ordered, reliable message link with byte counters and an optional
// transcript of message metadata.
class Channel {
 public:
  virtual ~Channel() = default;

  void send(Message m);
  Message recv();
  // Throws ProtocolError unless the next message has type `t`.
  Message recv(MsgType t);

  uint64_t bytes_sent() const;
  uint64_t bytes_received() const;
  void set_recording(bool on);
  std::vector<TranscriptEntry> take_transcript();
  // Unblocks peers and fails further operations.
  virtual void close() = 0;

 protected:
  virtual void send_impl(Message&& m) = 0;
  virtual Message recv_impl() = 0;

 private:
  void note(const Message& m, bool sent);
  mutable std::mutex mu_;
  uint64_t sent_ = 0, received_ = 0;
  bool recording_ = false;
  std::vector<TranscriptEntry> transcript_;
};

struct MemoryLinkOptions {
  // One-way delivery delay added to every message.
  std::chrono::microseconds latency{0};
  // Messages in flight per direction before send blocks.
  size_t capacity = 64;
};

// Two connected in-process endpoints.
std::pair<std::unique_ptr<Channel>, std::unique_ptr<Channel>> memory_link(const MemoryLinkOptions& o = {});

// TCP endpoints; addresses are "host:port".
std::unique_ptr<Channel> tcp_connect(const std::string& addr, std::chrono::milliseconds timeout = std::chrono::seconds(10));

class TcpListener {
 public:
  explicit TcpListener(const std::string& addr);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;
  std::unique_ptr<Channel> accept();
  uint16_t port() const { return port_; }
  void close();

 private:
  int fd_ = -1;
  uint16_t port_ = 0;
};

}  // namespace snail::protocol
