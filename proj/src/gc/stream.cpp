#include "gc/stream.hpp"

#include <cstring>
#include <limits>

namespace snail::gc {

namespace {

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<uint8_t>& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

uint64_t get_le(const uint8_t* p, int n) {
  uint64_t v = 0;
  for (int i = 0; i < n; ++i) v |= static_cast<uint64_t>(p[i]) << (8 * i);
  return v;
}

void put_block(std::vector<uint8_t>& out, const Block& b) {
  uint8_t tmp[16];
  b.to_bytes(tmp);
  out.insert(out.end(), tmp, tmp + 16);
}

}  // namespace

void append_frame(std::vector<uint8_t>& out, const Frame& f) {
  if (f.payload.size() >= std::numeric_limits<uint32_t>::max()) throw GcError("frame too large");
  put_u32(out, static_cast<uint32_t>(f.payload.size() + 1));
  out.push_back(static_cast<uint8_t>(f.type));
  out.insert(out.end(), f.payload.begin(), f.payload.end());
}

std::vector<uint8_t> encode_frame(const Frame& f) {
  std::vector<uint8_t> out;
  out.reserve(kFrameHeaderBytes + f.payload.size());
  append_frame(out, f);
  return out;
}

Frame decode_frame(std::span<const uint8_t> bytes) {
  FrameParser p;
  p.feed(bytes);
  Frame f;
  if (!p.next(f)) throw GcError("truncated frame");
  if (p.buffered() != 0) throw GcError("trailing bytes after frame");
  return f;
}

void FrameParser::feed(std::span<const uint8_t> bytes) {
  if (pos_ > 0) {
    buf_.erase(buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(pos_));
    pos_ = 0;
  }
  buf_.insert(buf_.end(), bytes.begin(), bytes.end());
}

bool FrameParser::next(Frame& out) {
  if (buffered() < 4) return false;
  const uint32_t len = static_cast<uint32_t>(get_le(buf_.data() + pos_, 4));
  if (len == 0) throw GcError("zero-length frame");
  if (buffered() < 4 + static_cast<size_t>(len)) return false;
  const uint8_t* p = buf_.data() + pos_ + 4;
  const uint8_t type = p[0];
  if (type < 1 || type > 5) throw GcError("unknown frame type " + std::to_string(type));
  out.type = static_cast<GcMsg>(type);
  out.payload.assign(p + 1, p + len);
  pos_ += 4 + len;
  return true;
}

std::vector<uint8_t> CircuitMeta::to_payload() const {
  std::vector<uint8_t> out(digest.begin(), digest.end());
  put_u64(out, and_gates);
  put_u32(out, input_bits);
  put_u32(out, output_bits);
  put_block(out, const_labels[0]);
  put_block(out, const_labels[1]);
  return out;
}

CircuitMeta CircuitMeta::from_payload(std::span<const uint8_t> p) {
  if (p.size() != kBytes) throw GcError("malformed circuit meta");
  CircuitMeta m;
  std::memcpy(m.digest.data(), p.data(), 32);
  m.and_gates = get_le(p.data() + 32, 8);
  m.input_bits = static_cast<uint32_t>(get_le(p.data() + 40, 4));
  m.output_bits = static_cast<uint32_t>(get_le(p.data() + 44, 4));
  m.const_labels[0] = Block::from_bytes(p.data() + 48);
  m.const_labels[1] = Block::from_bytes(p.data() + 64);
  return m;
}

std::vector<uint8_t> labels_to_bytes(std::span<const Block> labels) {
  std::vector<uint8_t> out;
  out.reserve(labels.size() * 16);
  for (const Block& b : labels) put_block(out, b);
  return out;
}

std::vector<Block> labels_from_bytes(std::span<const uint8_t> bytes) {
  if (bytes.size() % 16) throw GcError("label payload not a multiple of 16 bytes");
  std::vector<Block> out(bytes.size() / 16);
  for (size_t i = 0; i < out.size(); ++i) out[i] = Block::from_bytes(bytes.data() + 16 * i);
  return out;
}

uint64_t garbled_stream_bytes(uint64_t and_gates) {
  const uint64_t table = 32 * and_gates;
  const uint64_t chunks = (table + kTableChunkBytes - 1) / kTableChunkBytes;
  return kFrameHeaderBytes + CircuitMeta::kBytes + table + chunks * kFrameHeaderBytes;
}

}  // namespace snail::gc
