#include "gc/garble.hpp"

#include <sodium.h>

#include <cstring>

#include "gc/walk.hpp"

namespace snail::gc {

namespace {

void ensure_sodium() {
  static const int ok = sodium_init();
  if (ok < 0) throw GcError("libsodium initialization failed");
}

class TableWriter {
 public:
  explicit TableWriter(const FrameSink& sink) : sink_(sink) { buf_.reserve(kTableChunkBytes); }

  void put(const Block& a, const Block& b) {
    const size_t n = buf_.size();
    buf_.resize(n + 32);
    a.to_bytes(buf_.data() + n);
    b.to_bytes(buf_.data() + n + 16);
    if (buf_.size() == kTableChunkBytes) flush();
  }

  void flush() {
    if (buf_.empty()) return;
    sink_(Frame{GcMsg::kTableChunk, std::move(buf_)});
    buf_ = {};
    buf_.reserve(kTableChunkBytes);
  }

 private:
  const FrameSink& sink_;
  std::vector<uint8_t> buf_;
};

class TableReader {
 public:
  TableReader(const FrameSource& src, uint64_t and_gates) : src_(src), remaining_(32 * and_gates) {}

  void get(Block& a, Block& b) {
    if (pos_ == cur_.size()) {
      if (remaining_ == 0) throw GcError("garbled tables exhausted");
      Frame f = src_();
      if (f.type != GcMsg::kTableChunk) throw GcError("expected a table chunk");
      const size_t want = remaining_ < kTableChunkBytes ? remaining_ : kTableChunkBytes;
      if (f.payload.size() != want) throw GcError("table chunk has the wrong size");
      cur_ = std::move(f.payload);
      pos_ = 0;
      remaining_ -= want;
    }
    a = Block::from_bytes(cur_.data() + pos_);
    b = Block::from_bytes(cur_.data() + pos_ + 16);
    pos_ += 32;
  }

  bool exhausted() const { return remaining_ == 0 && pos_ == cur_.size(); }

 private:
  const FrameSource& src_;
  uint64_t remaining_;
  std::vector<uint8_t> cur_;
  size_t pos_ = 0;
};

// Half-gates garbling; AND gate g uses tweaks 2g and 2g + 1.
class Garbler {
 public:
  Garbler(const Block& delta, TableWriter& out) : delta_(delta), out_(out) {}

  void run(const BoolCircuit& t, std::vector<Block>& w) {
    for (const Gate& g : t.gates) {
      const Block a = w[g.a], b = w[g.b];
      w.push_back(g.kind == GateKind::kXor ? a ^ b : and_gate(a, b));
    }
  }

 private:
  Block and_gate(const Block& a0, const Block& b0) {
    const uint64_t j = 2 * index_, k = j + 1;
    ++index_;
    const Block in[4] = {a0, a0 ^ delta_, b0, b0 ^ delta_};
    const uint64_t tw[4] = {j, j, k, k};
    Block h[4];
    tweak_hash4(in, tw, h);
    const bool pa = a0.lsb(), pb = b0.lsb();
    const Block tg = h[0] ^ h[1] ^ select_mask(pb, delta_);
    const Block wg = h[0] ^ select_mask(pa, tg);
    const Block te = h[2] ^ h[3] ^ a0;
    const Block we = h[2] ^ select_mask(pb, te ^ a0);
    out_.put(tg, te);
    return wg ^ we;
  }

  Block delta_;
  TableWriter& out_;
  uint64_t index_ = 0;
};

class Evaluator {
 public:
  explicit Evaluator(TableReader& in) : in_(in) {}

  void run(const BoolCircuit& t, std::vector<Block>& w) {
    for (const Gate& g : t.gates) {
      const Block a = w[g.a], b = w[g.b];
      w.push_back(g.kind == GateKind::kXor ? a ^ b : and_gate(a, b));
    }
  }

 private:
  Block and_gate(const Block& a, const Block& b) {
    const uint64_t j = 2 * index_, k = j + 1;
    ++index_;
    Block tg, te, ha, hb;
    in_.get(tg, te);
    tweak_hash2(a, j, b, k, ha, hb);
    const Block wg = ha ^ select_mask(a.lsb(), tg);
    const Block we = hb ^ select_mask(b.lsb(), te ^ a);
    return wg ^ we;
  }

  TableReader& in_;
  uint64_t index_ = 0;
};

CircuitMeta make_meta(const LabelDeriver& d, const std::array<uint8_t, 32>& digest, uint64_t ands, uint32_t in,
                      uint32_t out) {
  CircuitMeta m;
  m.digest = digest;
  m.and_gates = ands;
  m.input_bits = in;
  m.output_bits = out;
  m.const_labels[0] = d.const_active(0);
  m.const_labels[1] = d.const_active(1);
  return m;
}

DecodeMap make_decode_map(const std::vector<Block>& zero, const Block& delta) {
  DecodeMap m;
  m.entries.reserve(zero.size());
  for (uint32_t i = 0; i < zero.size(); ++i)
    m.entries.push_back({decode_hash(zero[i], i), decode_hash(zero[i] ^ delta, i)});
  return m;
}

CircuitMeta read_meta(const FrameSource& src, const std::array<uint8_t, 32>& digest, uint64_t ands, uint32_t in,
                      uint32_t out, size_t labels_given) {
  Frame f = src();
  if (f.type != GcMsg::kCircuitMeta) throw GcError("expected circuit meta");
  const CircuitMeta m = CircuitMeta::from_payload(f.payload);
  if (m.digest != digest) throw GcError("garbled stream is for a different circuit");
  if (m.and_gates != ands || m.input_bits != in || m.output_bits != out)
    throw GcError("garbled stream shape does not match the circuit");
  if (labels_given != in) throw GcError("expected " + std::to_string(in) + " input labels");
  return m;
}

}  // namespace

GarbleSeed GarbleSeed::random() {
  ensure_sodium();
  uint8_t b[32];
  randombytes_buf(b, sizeof b);
  return from_bytes(b);
}

GarbleSeed GarbleSeed::from_bytes(std::span<const uint8_t> bytes) {
  if (bytes.size() != 32) throw GcError("seed material must be 32 bytes");
  GarbleSeed s{Block::from_bytes(bytes.data()), Block::from_bytes(bytes.data() + 16)};
  s.delta.lo |= 1;
  return s;
}

std::array<uint8_t, 32> GarbleSeed::to_bytes() const {
  std::array<uint8_t, 32> out{};
  seed.to_bytes(out.data());
  delta.to_bytes(out.data() + 16);
  return out;
}

LabelDeriver::LabelDeriver(const GarbleSeed& s) : aes_(s.seed), delta_(s.delta) { delta_.lo |= 1; }

uint64_t decode_hash(const Block& label, uint32_t index) {
  uint8_t in[20], out[crypto_generichash_BYTES_MIN];
  label.to_bytes(in);
  for (int i = 0; i < 4; ++i) in[16 + i] = static_cast<uint8_t>(index >> (8 * i));
  crypto_generichash(out, sizeof out, in, sizeof in, nullptr, 0);
  uint64_t v;
  std::memcpy(&v, out, 8);
  return v;
}

std::vector<uint8_t> DecodeMap::to_bytes() const {
  std::vector<uint8_t> out(entries.size() * 16);
  for (size_t i = 0; i < entries.size(); ++i) {
    std::memcpy(out.data() + 16 * i, &entries[i][0], 8);
    std::memcpy(out.data() + 16 * i + 8, &entries[i][1], 8);
  }
  return out;
}

DecodeMap DecodeMap::from_bytes(std::span<const uint8_t> bytes) {
  if (bytes.size() % 16) throw GcError("malformed decode map");
  DecodeMap m;
  m.entries.resize(bytes.size() / 16);
  for (size_t i = 0; i < m.entries.size(); ++i) {
    std::memcpy(&m.entries[i][0], bytes.data() + 16 * i, 8);
    std::memcpy(&m.entries[i][1], bytes.data() + 16 * i + 8, 8);
  }
  return m;
}

std::vector<uint8_t> DecodeMap::decode(std::span<const Block> labels) const {
  if (labels.size() != entries.size()) throw GcError("output label count does not match the decode map");
  std::vector<uint8_t> out(labels.size());
  for (uint32_t i = 0; i < labels.size(); ++i) {
    const uint64_t h = decode_hash(labels[i], i);
    if (h == entries[i][0])
      out[i] = 0;
    else if (h == entries[i][1])
      out[i] = 1;
    else
      throw GcError("output label " + std::to_string(i) + " does not decode");
  }
  return out;
}

DecodeMap garble(const CompiledCircuit& c, const GarbleSeed& seed, const FrameSink& sink) {
  const LabelDeriver d(seed);
  sink(Frame{GcMsg::kCircuitMeta, make_meta(d, c.digest, c.and_gates, c.input_bits, c.output_bits).to_payload()});
  std::vector<Block> lab(c.label_count);
  for (uint32_t i = 0; i < c.input_bits; ++i) lab[detail::input_label_index(c, i)] = d.input_zero(i);
  const Block consts[2] = {d.const_zero(0), d.const_zero(1)};
  TableWriter out(sink);
  Garbler g(d.delta(), out);
  detail::walk(c, lab, consts, [&](const BoolCircuit& t, std::vector<Block>& w) { g.run(t, w); });
  out.flush();
  return make_decode_map(detail::output_labels(c, lab), d.delta());
}

std::vector<Block> evaluate(const CompiledCircuit& c, const FrameSource& src, std::span<const Block> input_labels) {
  const CircuitMeta m = read_meta(src, c.digest, c.and_gates, c.input_bits, c.output_bits, input_labels.size());
  std::vector<Block> lab(c.label_count);
  for (uint32_t i = 0; i < c.input_bits; ++i) lab[detail::input_label_index(c, i)] = input_labels[i];
  const Block consts[2] = {m.const_labels[0], m.const_labels[1]};
  TableReader in(src, c.and_gates);
  Evaluator e(in);
  detail::walk(c, lab, consts, [&](const BoolCircuit& t, std::vector<Block>& w) { e.run(t, w); });
  if (!in.exhausted()) throw GcError("garbled tables left unconsumed");
  return detail::output_labels(c, lab);
}

DecodeMap garble(const BoolCircuit& c, const GarbleSeed& seed, const FrameSink& sink) {
  const LabelDeriver d(seed);
  sink(Frame{GcMsg::kCircuitMeta, make_meta(d, {}, c.and_count(), c.num_inputs,
                                            static_cast<uint32_t>(c.outputs.size())).to_payload()});
  std::vector<Block> w;
  w.reserve(c.num_wires());
  w.push_back(d.const_zero(0));
  w.push_back(d.const_zero(1));
  for (uint32_t i = 0; i < c.num_inputs; ++i) w.push_back(d.input_zero(i));
  TableWriter out(sink);
  Garbler g(d.delta(), out);
  g.run(c, w);
  out.flush();
  std::vector<Block> zero;
  for (Wire o : c.outputs) zero.push_back(w[o]);
  return make_decode_map(zero, d.delta());
}

std::vector<Block> evaluate(const BoolCircuit& c, const FrameSource& src, std::span<const Block> input_labels) {
  const CircuitMeta m =
      read_meta(src, {}, c.and_count(), c.num_inputs, static_cast<uint32_t>(c.outputs.size()), input_labels.size());
  std::vector<Block> w;
  w.reserve(c.num_wires());
  w.push_back(m.const_labels[0]);
  w.push_back(m.const_labels[1]);
  w.insert(w.end(), input_labels.begin(), input_labels.end());
  TableReader in(src, c.and_count());
  Evaluator e(in);
  e.run(c, w);
  if (!in.exhausted()) throw GcError("garbled tables left unconsumed");
  std::vector<Block> out;
  for (Wire o : c.outputs) out.push_back(w[o]);
  return out;
}

std::vector<Block> encode_inputs(const LabelDeriver& d, std::span<const uint8_t> bits) {
  std::vector<Block> out(bits.size());
  for (uint32_t i = 0; i < bits.size(); ++i) out[i] = d.input_label(i, bits[i] & 1);
  return out;
}

}  // namespace snail::gc
