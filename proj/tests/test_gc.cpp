#include <bit>
#include <deque>
#include <random>

#include "catch_amalgamated.hpp"
#include "gc/aes.hpp"
#include "gc/arith_circuits.hpp"
#include "gc/compile.hpp"
#include "gc/garble.hpp"
#include "gc/op_templates.hpp"
#include "gc/ot.hpp"
#include "gc/stream.hpp"
#include "obliv/cleartext.hpp"

using namespace snail;
using namespace snail::gc;

namespace {

std::vector<uint8_t> to_bits(uint64_t v, int w) {
  std::vector<uint8_t> r(w);
  for (int i = 0; i < w; ++i) r[i] = (v >> i) & 1;
  return r;
}

uint64_t from_bits(const std::vector<uint8_t>& b, size_t off, int w) {
  uint64_t v = 0;
  for (int i = 0; i < w; ++i) v |= static_cast<uint64_t>(b[off + i]) << i;
  return v;
}

struct Pipe {
  std::deque<Frame> q;
  uint64_t bytes = 0;
  FrameSink sink() {
    return [this](Frame&& f) {
      bytes += kFrameHeaderBytes + f.payload.size();
      q.push_back(std::move(f));
    };
  }
  FrameSource source() {
    return [this] {
      if (q.empty()) throw GcError("pipe drained");
      Frame f = std::move(q.front());
      q.pop_front();
      return f;
    };
  }
};

// Garble, evaluate and decode a flat circuit on one input assignment.
std::vector<uint8_t> run_garbled(const BoolCircuit& c, const std::vector<uint8_t>& in, uint64_t* bytes = nullptr) {
  const auto seed = GarbleSeed::random();
  Pipe p;
  const DecodeMap dm = garble(c, seed, p.sink());
  const auto labels = encode_inputs(LabelDeriver(seed), in);
  const auto out = evaluate(c, p.source(), labels);
  REQUIRE(p.q.empty());
  if (bytes) *bytes = p.bytes;
  return dm.decode(out);
}

BoolCircuit adder8() {
  CircuitBuilder b;
  const Bits x = b.inputs(8), y = b.inputs(8);
  b.output(bits::add(b, x, y));
  return b.finish();
}

}  // namespace

TEST_CASE("AES-128 matches the FIPS-197 example") {
  uint8_t key[16], pt[16], ct[16];
  for (int i = 0; i < 16; ++i) {
    key[i] = static_cast<uint8_t>(i);
    pt[i] = static_cast<uint8_t>(i * 0x11);
  }
  const uint8_t expect[16] = {0x69, 0xc4, 0xe0, 0xd8, 0x6a, 0x7b, 0x04, 0x30,
                              0xd8, 0xcd, 0xb7, 0x80, 0x70, 0xb4, 0xc5, 0x5a};
  const Aes128 aes(Block::from_bytes(key));
  aes.encrypt(Block::from_bytes(pt)).to_bytes(ct);
  REQUIRE(std::equal(ct, ct + 16, expect));
  Block in[3] = {Block::from_bytes(pt), {1, 2}, {3, 4}}, out[3];
  aes.encrypt_n(in, out, 3);
  for (int i = 0; i < 3; ++i) REQUIRE(out[i] == aes.encrypt(in[i]));
}

TEST_CASE("tweakable hash batches agree with the single form") {
  const Block x[4] = {{1, 2}, {3, 4}, {5, 6}, {7, 8}};
  const uint64_t t[4] = {10, 11, 12, 13};
  Block out[4], a, b;
  tweak_hash4(x, t, out);
  tweak_hash2(x[0], t[0], x[1], t[1], a, b);
  for (int i = 0; i < 4; ++i) REQUIRE(out[i] == tweak_hash(x[i], t[i]));
  REQUIRE(a == out[0]);
  REQUIRE(b == out[1]);
  REQUIRE_FALSE(tweak_hash(x[0], 1) == tweak_hash(x[0], 2));
}

TEST_CASE("8-bit adder, exhaustive in the clear and garbled") {
  const BoolCircuit c = adder8();
  REQUIRE(c.outputs.size() == 8);
  for (uint32_t a = 0; a < 256; ++a)
    for (uint32_t b = 0; b < 256; ++b) {
      auto in = to_bits(a, 8);
      const auto yb = to_bits(b, 8);
      in.insert(in.end(), yb.begin(), yb.end());
      const uint64_t want = (a + b) & 0xFF;
      REQUIRE(from_bits(c.eval(in), 0, 8) == want);
      REQUIRE(from_bits(run_garbled(c, in), 0, 8) == want);
    }
}

TEST_CASE("word helpers, exhaustive on small widths") {
  CircuitBuilder b;
  const Bits x = b.inputs(6), y = b.inputs(6);
  Wire borrow;
  b.output(bits::mul_unsigned(b, x, y));          // 12 bits
  b.output(bits::sub(b, x, y, &borrow));          // 6 bits
  b.output(borrow);
  b.output(bits::less_unsigned(b, x, y));
  b.output(bits::less_signed(b, x, y));
  b.output(bits::equal(b, x, y));
  const BoolCircuit c = b.finish();
  for (int a = 0; a < 64; ++a)
    for (int d = 0; d < 64; ++d) {
      auto in = to_bits(a, 6);
      const auto yb = to_bits(d, 6);
      in.insert(in.end(), yb.begin(), yb.end());
      const auto out = c.eval(in);
      const int sa = a >= 32 ? a - 64 : a, sd = d >= 32 ? d - 64 : d;
      REQUIRE(from_bits(out, 0, 12) == static_cast<uint64_t>(a * d));
      REQUIRE(from_bits(out, 12, 6) == static_cast<uint64_t>((a - d) & 63));
      REQUIRE(out[18] == (a < d));
      REQUIRE(out[19] == (a < d));
      REQUIRE(out[20] == (sa < sd));
      REQUIRE(out[21] == (a == d));
    }
}

TEST_CASE("constant folding keeps gate counts honest") {
  CircuitBuilder b;
  const Wire x = b.input();
  REQUIRE(b.AND(x, kFalse) == kFalse);
  REQUIRE(b.AND(x, kTrue) == x);
  REQUIRE(b.XOR(x, kFalse) == x);
  b.output(b.NOT(x));
  const auto c = b.finish();
  REQUIRE(c.and_count() == 0);
  REQUIRE(c.eval({1})[0] == 0);
  REQUIRE(run_garbled(c, {0})[0] == 1);
}

TEST_CASE("garbled op circuits agree with the reference ops") {
  std::mt19937_64 rng(77);
  const auto f = obliv::NumericFormat::float32(), x = obliv::NumericFormat::fixed64(24);
  for (auto kind : {obliv::OpKind::kAdd, obliv::OpKind::kMul, obliv::OpKind::kDiv, obliv::OpKind::kSqrt,
                    obliv::OpKind::kCmpLt}) {
    const auto& t = op_template(kind, f);
    for (int i = 0; i < 40; ++i) {
      const uint32_t a = static_cast<uint32_t>(rng()), b = static_cast<uint32_t>(rng());
      auto in = to_bits(a, 32);
      if (obliv::op_arity(kind) > 1) {
        const auto bb = to_bits(b, 32);
        in.insert(in.end(), bb.begin(), bb.end());
      }
      uint64_t want = 0;
      switch (kind) {
        case obliv::OpKind::kAdd: want = obliv::f32::add(a, b); break;
        case obliv::OpKind::kMul: want = obliv::f32::mul(a, b); break;
        case obliv::OpKind::kDiv: want = obliv::f32::div(a, b); break;
        case obliv::OpKind::kSqrt: want = obliv::f32::sqrt(a); break;
        default: want = obliv::f32::less(a, b); break;
      }
      REQUIRE(from_bits(run_garbled(t.circuit, in), 0, t.result_width) == want);
    }
  }
  const auto& m = op_template(obliv::OpKind::kMul, x);
  REQUIRE(m.sticky);
  for (int i = 0; i < 20; ++i) {
    const int64_t a = static_cast<int64_t>(rng()) >> (rng() % 40), b = static_cast<int64_t>(rng()) >> (rng() % 40);
    auto in = to_bits(static_cast<uint64_t>(a), 64);
    const auto bb = to_bits(static_cast<uint64_t>(b), 64);
    in.insert(in.end(), bb.begin(), bb.end());
    in.push_back(0);
    const auto out = run_garbled(m.circuit, in);
    const auto want = obliv::fx::mul(a, b, 24);
    REQUIRE(from_bits(out, 0, 64) == static_cast<uint64_t>(want.v));
    REQUIRE(out[64] == want.overflow);
  }
}

TEST_CASE("compiled tapes stream, evaluate and decode") {
  const auto fmt = obliv::NumericFormat::float32();
  obliv::TapeBuilder tb(fmt);
  obliv::ObliviousTape tape;
  {
    obliv::BuildScope scope(tb);
    const obliv::Secret a = tb.input(), b = tb.input();
    tb.output(a * b + obliv::Secret(1.5));
    tb.output(obliv::select(obliv::less(a, b), a, b));
    tape = tb.finish();
  }
  const CompiledCircuit cc = compile(tape);
  REQUIRE(cc.input_bits == 64);
  REQUIRE(cc.output_bits == 64);
  REQUIRE(cc.and_gates == obliv::tape_cost(tape).and_gates);

  const std::vector<uint64_t> words = {std::bit_cast<uint32_t>(2.5f), std::bit_cast<uint32_t>(-4.0f)};
  const auto bits_in = input_bits(cc, words);
  const auto ref = obliv::run_cleartext(tape, words);
  REQUIRE(output_words(cc, eval_plain(cc, bits_in)).words == ref.outputs);

  const auto seed = GarbleSeed::random();
  Pipe p;
  const DecodeMap dm = garble(cc, seed, p.sink());
  REQUIRE(p.bytes == garbled_stream_bytes(cc.and_gates));
  Pipe copy = p;
  const auto out = evaluate(cc, p.source(), encode_inputs(LabelDeriver(seed), bits_in));
  REQUIRE(output_words(cc, dm.decode(out)).words == ref.outputs);

  SECTION("the flattened circuit streams the same tables") {
    Pipe q;
    garble(flatten(cc), seed, q.sink());
    REQUIRE(q.q.size() == copy.q.size());
    for (size_t i = 1; i < q.q.size(); ++i) REQUIRE(q.q[i].payload == copy.q[i].payload);
  }
  SECTION("a truncated stream is rejected") {
    copy.q.pop_back();
    REQUIRE_THROWS_AS(evaluate(cc, copy.source(), encode_inputs(LabelDeriver(seed), bits_in)), GcError);
  }
  SECTION("a label from another session does not decode") {
    auto bad = out;
    bad[0] = bad[0] ^ Block{2, 0};
    REQUIRE_THROWS_AS(dm.decode(bad), GcError);
  }
  SECTION("decode maps survive serialization") {
    REQUIRE(DecodeMap::from_bytes(dm.to_bytes()).decode(out) == dm.decode(out));
  }
}

TEST_CASE("seed material and label derivation") {
  std::array<uint8_t, 32> raw{};
  for (int i = 0; i < 32; ++i) raw[i] = static_cast<uint8_t>(i * 7);
  const auto s = GarbleSeed::from_bytes(raw);
  REQUIRE(s.delta.lsb());
  REQUIRE(GarbleSeed::from_bytes(s.to_bytes()).delta == s.delta);
  const LabelDeriver d(s);
  REQUIRE((d.input_label(5, true) ^ d.input_label(5, false)) == s.delta);
  REQUIRE_FALSE(d.input_zero(5) == d.input_zero(6));
  REQUIRE(d.const_active(1) == (d.const_zero(1) ^ s.delta));
  REQUIRE_THROWS(GarbleSeed::from_bytes(std::span<const uint8_t>(raw.data(), 31)));
}

TEST_CASE("frames and the incremental parser") {
  const Frame f{GcMsg::kTableChunk, {1, 2, 3, 4, 5}};
  const auto bytes = encode_frame(f);
  REQUIRE(bytes.size() == 5 + 5);
  REQUIRE(bytes[0] == 6);
  REQUIRE(bytes[4] == static_cast<uint8_t>(GcMsg::kTableChunk));
  const Frame back = decode_frame(bytes);
  REQUIRE(back.type == f.type);
  REQUIRE(back.payload == f.payload);
  REQUIRE_THROWS_AS(decode_frame(std::span<const uint8_t>(bytes.data(), bytes.size() - 1)), GcError);

  std::vector<uint8_t> stream;
  append_frame(stream, f);
  append_frame(stream, Frame{GcMsg::kDecodeMap, {}});
  FrameParser p;
  Frame out;
  p.feed(std::span<const uint8_t>(stream.data(), 3));
  REQUIRE_FALSE(p.next(out));
  p.feed(std::span<const uint8_t>(stream.data() + 3, stream.size() - 3));
  REQUIRE(p.next(out));
  REQUIRE(out.payload == f.payload);
  REQUIRE(p.next(out));
  REQUIRE(out.type == GcMsg::kDecodeMap);
  REQUIRE(p.buffered() == 0);

  CircuitMeta m;
  m.digest[3] = 9;
  m.and_gates = 123456789;
  m.input_bits = 1152;
  m.output_bits = 224;
  m.const_labels[1] = {7, 8};
  const auto pl = m.to_payload();
  REQUIRE(pl.size() == CircuitMeta::kBytes);
  const auto m2 = CircuitMeta::from_payload(pl);
  REQUIRE(m2.and_gates == m.and_gates);
  REQUIRE(m2.digest == m.digest);
  REQUIRE(m2.const_labels[1] == m.const_labels[1]);

  // Meta frame plus 32 bytes per AND gate in 64 KiB chunks.
  REQUIRE(garbled_stream_bytes(0) == 5 + 80);
  REQUIRE(garbled_stream_bytes(2048) == 5 + 80 + 65536 + 5);
  REQUIRE(garbled_stream_bytes(2049) == 5 + 80 + 65568 + 10);
}

TEST_CASE("base OT delivers exactly the chosen messages") {
  std::mt19937_64 rng(4);
  const size_t n = 64;
  std::vector<std::array<Block, 2>> pairs(n);
  std::vector<uint8_t> choices(n);
  for (size_t i = 0; i < n; ++i) {
    pairs[i] = {Block{rng(), rng()}, Block{rng(), rng()}};
    choices[i] = rng() & 1;
  }
  const OtSender sender;
  OtReceiver receiver(choices);
  const auto setup = sender.setup();
  REQUIRE(setup.size() == kOtPointBytes);
  const auto msg = receiver.choose(setup);
  REQUIRE(msg.size() == n * kOtPointBytes);
  const auto resp = sender.respond(msg, pairs);
  REQUIRE(resp.size() == n * 32);
  const auto got = receiver.finish(resp);
  for (size_t i = 0; i < n; ++i) {
    REQUIRE(got[i] == pairs[i][choices[i]]);
    REQUIRE_FALSE(got[i] == pairs[i][1 - choices[i]]);
  }
  std::vector<uint8_t> junk(32, 0xFF);
  OtReceiver r2(choices);
  REQUIRE_THROWS_AS(r2.choose(junk), OtError);
}
