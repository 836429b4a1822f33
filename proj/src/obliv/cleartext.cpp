#include "obliv/cleartext.hpp"

#include <string>

namespace snail::obliv {

CostReport& CostReport::operator+=(const CostReport& o) {
  and_gates += o.and_gates;
  xor_gates += o.xor_gates;
  bytes_tx += o.bytes_tx;
  rounds += o.rounds;
  return *this;
}

uint64_t OpHistogram::arithmetic_total() const {
  uint64_t s = 0;
  for (int k = static_cast<int>(OpKind::kAdd); k < kNumOpKinds; ++k) s += counts[k];
  return s;
}

OpHistogram op_histogram(const ObliviousTape& t) {
  OpHistogram h;
  for (const auto& op : t.ops) ++h.counts[static_cast<int>(op.kind)];
  return h;
}

CostReport tape_cost(const ObliviousTape& t) {
  // Cost per (kind, bit-select) is looked up once, then multiplied by counts.
  std::array<uint64_t, kNumOpKinds> counts{};
  uint64_t bit_selects = 0;
  for (const auto& op : t.ops) {
    if (op.kind == OpKind::kSelect && t.is_bit[op.b]) {
      ++bit_selects;
    } else {
      ++counts[static_cast<int>(op.kind)];
    }
  }
  CostReport r;
  for (int k = 0; k < kNumOpKinds; ++k) {
    if (!counts[k]) continue;
    const GateCost g = gate_cost(static_cast<OpKind>(k), t.format);
    r.and_gates += counts[k] * g.and_gates;
    r.xor_gates += counts[k] * g.xor_gates;
  }
  if (bit_selects) {
    const GateCost g = gate_cost(OpKind::kSelect, t.format, true);
    r.and_gates += bit_selects * g.and_gates;
    r.xor_gates += bit_selects * g.xor_gates;
  }
  r.bytes_tx = 32 * r.and_gates;
  r.rounds = t.ops.empty() ? 0 : 1;
  return r;
}

namespace {

struct Float32Ops {
  static uint64_t add(uint64_t a, uint64_t b, bool&) { return f32::add(a, b); }
  static uint64_t sub(uint64_t a, uint64_t b, bool&) { return f32::sub(a, b); }
  static uint64_t mul(uint64_t a, uint64_t b, bool&) { return f32::mul(a, b); }
  static uint64_t div(uint64_t a, uint64_t b, bool&) { return f32::div(a, b); }
  static uint64_t sqrt(uint64_t a, bool&) { return f32::sqrt(a); }
  static uint64_t neg(uint64_t a, bool&) { return f32::neg(a); }
  static uint64_t abs(uint64_t a, bool&) { return f32::abs(a); }
  static bool less(uint64_t a, uint64_t b) { return f32::less(a, b); }
};

struct Fixed64Ops {
  int frac;
  static uint64_t take(fx::Result r, bool& ovf) {
    ovf |= r.overflow;
    return static_cast<uint64_t>(r.v);
  }
  static int64_t s(uint64_t v) { return static_cast<int64_t>(v); }
  uint64_t add(uint64_t a, uint64_t b, bool& o) const { return take(fx::add(s(a), s(b)), o); }
  uint64_t sub(uint64_t a, uint64_t b, bool& o) const { return take(fx::sub(s(a), s(b)), o); }
  uint64_t mul(uint64_t a, uint64_t b, bool& o) const { return take(fx::mul(s(a), s(b), frac), o); }
  uint64_t div(uint64_t a, uint64_t b, bool& o) const { return take(fx::div(s(a), s(b), frac), o); }
  uint64_t sqrt(uint64_t a, bool& o) const { return take(fx::sqrt(s(a), frac), o); }
  uint64_t neg(uint64_t a, bool& o) const { return take(fx::neg(s(a)), o); }
  uint64_t abs(uint64_t a, bool& o) const { return take(fx::abs(s(a)), o); }
  static bool less(uint64_t a, uint64_t b) { return s(a) < s(b); }
};

template <class Ops>
void interpret(const ObliviousTape& t, std::span<const uint64_t> inputs, const Ops& ops,
               std::vector<uint64_t>& v, bool& ovf) {
  size_t next_input = 0;
  for (size_t i = 0; i < t.ops.size(); ++i) {
    const TapeOp& op = t.ops[i];
    uint64_t r = 0;
    switch (op.kind) {
      case OpKind::kInput:
        r = inputs[next_input++];
        if (t.format.kind == FormatKind::kFloat32) r &= 0xFFFFFFFFu;
        break;
      case OpKind::kConst:
      case OpKind::kConstBit:
        r = op.imm;
        break;
      case OpKind::kAdd:
        r = ops.add(v[op.a], v[op.b], ovf);
        break;
      case OpKind::kSub:
        r = ops.sub(v[op.a], v[op.b], ovf);
        break;
      case OpKind::kMul:
        r = ops.mul(v[op.a], v[op.b], ovf);
        break;
      case OpKind::kDiv:
        r = ops.div(v[op.a], v[op.b], ovf);
        break;
      case OpKind::kSqrt:
        r = ops.sqrt(v[op.a], ovf);
        break;
      case OpKind::kNeg:
        r = ops.neg(v[op.a], ovf);
        break;
      case OpKind::kAbs:
        r = ops.abs(v[op.a], ovf);
        break;
      case OpKind::kCmpLt:
        r = ops.less(v[op.a], v[op.b]) ? 1 : 0;
        break;
      case OpKind::kSelect:
        r = v[op.a] ? v[op.b] : v[op.c];
        break;
    }
    v[i] = r;
  }
}

}  // namespace

CleartextResult run_cleartext(const ObliviousTape& t, std::span<const uint64_t> inputs) {
  if (inputs.size() != t.inputs.size())
    throw TapeError("arity mismatch: tape has " + std::to_string(t.inputs.size()) + " inputs, got " +
                    std::to_string(inputs.size()));
  CleartextResult res;
  std::vector<uint64_t> v(t.ops.size());
  if (t.format.kind == FormatKind::kFloat32) {
    interpret(t, inputs, Float32Ops{}, v, res.overflow);
  } else {
    interpret(t, inputs, Fixed64Ops{t.format.frac_bits}, v, res.overflow);
  }
  res.outputs.reserve(t.outputs.size());
  for (uint32_t id : t.outputs) res.outputs.push_back(v[id]);
  res.cost = tape_cost(t);
  return res;
}

std::vector<uint64_t> encode_all(std::span<const double> v, NumericFormat fmt) {
  std::vector<uint64_t> r;
  r.reserve(v.size());
  for (double x : v) r.push_back(encode(x, fmt));
  return r;
}

std::vector<double> decode_all(std::span<const uint64_t> raw, NumericFormat fmt) {
  std::vector<double> r;
  r.reserve(raw.size());
  for (uint64_t x : raw) r.push_back(decode(x, fmt));
  return r;
}

}  // namespace snail::obliv
