#include "obliv/tape.hpp"

#include <sodium.h>

#include <cstring>

namespace snail::obliv {

namespace {
thread_local TapeBuilder* g_current = nullptr;

constexpr uint8_t kMagic[4] = {'S', 'N', 'T', 'P'};
constexpr uint16_t kVersion = 1;

TapeBuilder* same_builder(const Secret& a, const Secret& b) {
  if (!a.valid() || !b.valid() || a.builder() != b.builder())
    throw TapeError("operands belong to different tapes or are unset");
  return a.builder();
}

void put_u32(std::vector<uint8_t>& o, uint32_t v) {
  for (int i = 0; i < 4; ++i) o.push_back(static_cast<uint8_t>(v >> (8 * i)));
}
void put_u64(std::vector<uint8_t>& o, uint64_t v) {
  for (int i = 0; i < 8; ++i) o.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

struct Reader {
  std::span<const uint8_t> s;
  size_t pos = 0;
  void need(size_t n) {
    if (pos + n > s.size()) throw TapeError("truncated tape");
  }
  uint8_t u8() {
    need(1);
    return s[pos++];
  }
  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(s[pos++]) << (8 * i);
    return v;
  }
  uint64_t u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(s[pos++]) << (8 * i);
    return v;
  }
};

bool result_is_bit(const std::vector<uint8_t>& is_bit, const TapeOp& op) {
  switch (op.kind) {
    case OpKind::kConstBit:
    case OpKind::kCmpLt:
      return true;
    case OpKind::kSelect:
      return is_bit[op.b] != 0;
    default:
      return false;
  }
}
}  // namespace

const char* op_name(OpKind k) {
  static const char* names[kNumOpKinds] = {"input", "const", "const_bit", "add", "sub", "mul",
                                           "div",   "sqrt",  "neg",       "abs", "cmp_lt", "select"};
  return names[static_cast<int>(k)];
}

int op_arity(OpKind k) {
  switch (k) {
    case OpKind::kInput:
    case OpKind::kConst:
    case OpKind::kConstBit:
      return 0;
    case OpKind::kSqrt:
    case OpKind::kNeg:
    case OpKind::kAbs:
      return 1;
    case OpKind::kSelect:
      return 3;
    default:
      return 2;
  }
}

// Layout: magic, u16 version, u8 format kind, u8 frac bits, u32 op count,
// ops (u8 kind, u32 LE operand ids, u64 LE constant word or u8 bit),
// u32 output count, u32 output ids.
std::vector<uint8_t> serialize(const ObliviousTape& t) {
  std::vector<uint8_t> o;
  o.reserve(16 + t.ops.size() * 9 + t.outputs.size() * 4);
  o.insert(o.end(), kMagic, kMagic + 4);
  o.push_back(kVersion & 0xFF);
  o.push_back(kVersion >> 8);
  o.push_back(static_cast<uint8_t>(t.format.kind));
  o.push_back(static_cast<uint8_t>(t.format.frac_bits));
  put_u32(o, static_cast<uint32_t>(t.ops.size()));
  for (const auto& op : t.ops) {
    o.push_back(static_cast<uint8_t>(op.kind));
    const int ar = op_arity(op.kind);
    if (ar >= 1) put_u32(o, op.a);
    if (ar >= 2) put_u32(o, op.b);
    if (ar >= 3) put_u32(o, op.c);
    if (op.kind == OpKind::kConst) put_u64(o, op.imm);
    if (op.kind == OpKind::kConstBit) o.push_back(static_cast<uint8_t>(op.imm));
  }
  put_u32(o, static_cast<uint32_t>(t.outputs.size()));
  for (uint32_t id : t.outputs) put_u32(o, id);
  return o;
}

ObliviousTape deserialize(std::span<const uint8_t> bytes) {
  Reader r{bytes};
  for (uint8_t m : kMagic)
    if (r.u8() != m) throw TapeError("not a tape");
  uint16_t version = r.u8();
  version |= static_cast<uint16_t>(r.u8()) << 8;
  if (version != kVersion) throw TapeError("unsupported tape version " + std::to_string(version));
  const uint8_t kind = r.u8();
  const uint8_t frac = r.u8();
  ObliviousTape t;
  if (kind == 0) {
    t.format = NumericFormat::float32();
  } else if (kind == 1) {
    t.format = NumericFormat::fixed64(frac);
  } else {
    throw TapeError("bad format kind");
  }
  const uint32_t n = r.u32();
  t.ops.reserve(n);
  t.is_bit.reserve(n);
  for (uint32_t i = 0; i < n; ++i) {
    TapeOp op;
    const uint8_t k = r.u8();
    if (k >= kNumOpKinds) throw TapeError("unsupported op kind " + std::to_string(k));
    op.kind = static_cast<OpKind>(k);
    const int ar = op_arity(op.kind);
    if (ar >= 1) op.a = r.u32();
    if (ar >= 2) op.b = r.u32();
    if (ar >= 3) op.c = r.u32();
    if (op.kind == OpKind::kConst) op.imm = r.u64();
    if (op.kind == OpKind::kConstBit) op.imm = r.u8() & 1;
    for (uint32_t id : {op.a, op.b, op.c})
      if (ar > 0 && id >= i) throw TapeError("operand refers forward");
    if (op.kind == OpKind::kInput) t.inputs.push_back(i);
    t.is_bit.push_back(result_is_bit(t.is_bit, op));
    t.ops.push_back(op);
  }
  const uint32_t no = r.u32();
  for (uint32_t i = 0; i < no; ++i) {
    const uint32_t id = r.u32();
    if (id >= n) throw TapeError("output out of range");
    t.outputs.push_back(id);
  }
  if (r.pos != bytes.size()) throw TapeError("trailing bytes after tape");
  return t;
}

std::array<uint8_t, 32> structure_digest(const ObliviousTape& t) {
  const auto bytes = serialize(t);
  std::array<uint8_t, 32> d{};
  crypto_generichash(d.data(), d.size(), bytes.data(), bytes.size(), nullptr, 0);
  return d;
}

std::string digest_hex(const std::array<uint8_t, 32>& d) {
  static const char* hex = "0123456789abcdef";
  std::string s;
  for (uint8_t b : d) {
    s.push_back(hex[b >> 4]);
    s.push_back(hex[b & 15]);
  }
  return s;
}

// ---- Secret ----

Secret::Secret(double v) : Secret(current_builder().constant(v)) {}

Secret Secret::operator-() const { return {b_, b_->emit(OpKind::kNeg, id_)}; }
Secret& Secret::operator+=(const Secret& o) { return *this = *this + o; }
Secret& Secret::operator-=(const Secret& o) { return *this = *this - o; }
Secret& Secret::operator*=(const Secret& o) { return *this = *this * o; }
Secret& Secret::operator/=(const Secret& o) { return *this = *this / o; }

Secret operator+(const Secret& a, const Secret& b) {
  auto* t = same_builder(a, b);
  return {t, t->emit(OpKind::kAdd, a.id(), b.id())};
}
Secret operator-(const Secret& a, const Secret& b) {
  auto* t = same_builder(a, b);
  return {t, t->emit(OpKind::kSub, a.id(), b.id())};
}
Secret operator*(const Secret& a, const Secret& b) {
  auto* t = same_builder(a, b);
  return {t, t->emit(OpKind::kMul, a.id(), b.id())};
}
Secret operator/(const Secret& a, const Secret& b) {
  auto* t = same_builder(a, b);
  return {t, t->emit(OpKind::kDiv, a.id(), b.id())};
}
Secret sqrt(const Secret& a) { return {a.builder(), a.builder()->emit(OpKind::kSqrt, a.id())}; }
Secret abs(const Secret& a) { return {a.builder(), a.builder()->emit(OpKind::kAbs, a.id())}; }

SecretBit less(const Secret& a, const Secret& b) {
  auto* t = same_builder(a, b);
  return {t, t->emit(OpKind::kCmpLt, a.id(), b.id())};
}

Secret select(const SecretBit& c, const Secret& a, const Secret& b) {
  auto* t = same_builder(a, b);
  if (c.builder() != t) throw TapeError("select condition from another tape");
  return {t, t->emit(OpKind::kSelect, c.id(), a.id(), b.id())};
}

SecretBit select(const SecretBit& c, const SecretBit& a, const SecretBit& b) {
  auto* t = c.builder();
  if (!t || a.builder() != t || b.builder() != t) throw TapeError("select operands from another tape");
  return {t, t->emit(OpKind::kSelect, c.id(), a.id(), b.id())};
}

SecretBit land(const SecretBit& a, const SecretBit& b) { return select(a, b, a); }
SecretBit lor(const SecretBit& a, const SecretBit& b) { return select(a, a, b); }
SecretBit lnot(const SecretBit& a) {
  auto* t = a.builder();
  return select(a, t->constant_bit(false), t->constant_bit(true));
}

// ---- TapeBuilder ----

TapeBuilder::TapeBuilder(NumericFormat fmt) { tape_.format = fmt; }

uint32_t TapeBuilder::emit(OpKind k, uint32_t a, uint32_t b, uint32_t c, uint64_t imm) {
  const uint32_t id = static_cast<uint32_t>(tape_.ops.size());
  const int ar = op_arity(k);
  const uint32_t args[3] = {a, b, c};
  for (int i = 0; i < ar; ++i)
    if (args[i] >= id) throw TapeError("operand refers to a missing slot");
  switch (k) {
    case OpKind::kCmpLt:
    case OpKind::kAdd:
    case OpKind::kSub:
    case OpKind::kMul:
    case OpKind::kDiv:
      if (slot_is_bit(a) || slot_is_bit(b)) throw TapeError("arithmetic on a boolean slot");
      break;
    case OpKind::kSqrt:
    case OpKind::kNeg:
    case OpKind::kAbs:
      if (slot_is_bit(a)) throw TapeError("arithmetic on a boolean slot");
      break;
    case OpKind::kSelect:
      if (!slot_is_bit(a)) throw TapeError("select condition must be boolean");
      if (slot_is_bit(b) != slot_is_bit(c)) throw TapeError("select branches differ in type");
      break;
    default:
      break;
  }
  TapeOp op{k, a, b, c, imm};
  tape_.is_bit.push_back(result_is_bit(tape_.is_bit, op));
  tape_.ops.push_back(op);
  if (k == OpKind::kInput) tape_.inputs.push_back(id);
  return id;
}

Secret TapeBuilder::input() {
  return {this, emit(OpKind::kInput)};
}

Secret TapeBuilder::lift(double v) {
  const uint64_t raw = encode(v, tape_.format);
  witness_.push_back(raw);
  return {this, emit(OpKind::kInput)};
}

Secret TapeBuilder::constant(double v) {
  const uint64_t raw = encode(v, tape_.format);
  auto it = consts_.find(raw);
  if (it != consts_.end()) return {this, it->second};
  const uint32_t id = emit(OpKind::kConst, 0, 0, 0, raw);
  consts_.emplace(raw, id);
  return {this, id};
}

SecretBit TapeBuilder::constant_bit(bool v) {
  uint32_t& slot = bit_consts_[v ? 1 : 0];
  if (slot == UINT32_MAX) slot = emit(OpKind::kConstBit, 0, 0, 0, v ? 1 : 0);
  return {this, slot};
}

void TapeBuilder::output(const Secret& s) {
  if (s.builder() != this) throw TapeError("output from another tape");
  tape_.outputs.push_back(s.id());
}

void TapeBuilder::output(const SecretBit& s) {
  if (s.builder() != this) throw TapeError("output from another tape");
  tape_.outputs.push_back(s.id());
}

ObliviousTape TapeBuilder::finish() {
  consts_.clear();
  bit_consts_[0] = bit_consts_[1] = UINT32_MAX;
  return std::move(tape_);
}

BuildScope::BuildScope(TapeBuilder& b) : prev_(g_current) { g_current = &b; }
BuildScope::~BuildScope() { g_current = prev_; }

TapeBuilder& current_builder() {
  if (!g_current) throw TapeError("no tape builder in scope");
  return *g_current;
}

}  // namespace snail::obliv
