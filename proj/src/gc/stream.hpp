#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "gc/block.hpp"

namespace snail::gc {

class GcError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Frame = [u32 LE length of type + payload][type][payload].
enum class GcMsg : uint8_t {
  kCircuitMeta = 1,
  kTableChunk = 2,
  kInputLabels = 3,
  kOutputLabels = 4,
  kDecodeMap = 5,
};

constexpr size_t kFrameHeaderBytes = 5;
constexpr size_t kTableChunkBytes = 64 * 1024;

struct Frame {
  GcMsg type{};
  std::vector<uint8_t> payload;
};

using FrameSink = std::function<void(Frame&&)>;
using FrameSource = std::function<Frame()>;

void append_frame(std::vector<uint8_t>& out, const Frame& f);
std::vector<uint8_t> encode_frame(const Frame& f);
// Parses exactly one frame; throws on truncation or trailing bytes.
Frame decode_frame(std::span<const uint8_t> bytes);

// Incremental parser over a byte stream.
class FrameParser {
 public:
  void feed(std::span<const uint8_t> bytes);
  bool next(Frame& out);
  size_t buffered() const { return buf_.size() - pos_; }

 private:
  std::vector<uint8_t> buf_;
  size_t pos_ = 0;
};

struct CircuitMeta {
  std::array<uint8_t, 32> digest{};
  uint64_t and_gates = 0;
  uint32_t input_bits = 0;
  uint32_t output_bits = 0;
  Block const_labels[2];  // active labels of the false and true wires

  static constexpr size_t kBytes = 32 + 8 + 4 + 4 + 32;
  std::vector<uint8_t> to_payload() const;
  static CircuitMeta from_payload(std::span<const uint8_t> p);
};

std::vector<uint8_t> labels_to_bytes(std::span<const Block> labels);
std::vector<Block> labels_from_bytes(std::span<const uint8_t> bytes);

// Bytes of a full garbled stream (meta frame plus table chunks) for a
// circuit with `and_gates` AND gates.
uint64_t garbled_stream_bytes(uint64_t and_gates);

}  // namespace snail::gc
