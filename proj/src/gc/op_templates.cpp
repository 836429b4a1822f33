#include "gc/op_templates.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <tuple>

#include "gc/arith_circuits.hpp"
#include "obliv/cleartext.hpp"

namespace snail::gc {

using obliv::OpKind;

bool op_has_template(OpKind kind) {
  return kind != OpKind::kInput && kind != OpKind::kConst && kind != OpKind::kConstBit;
}

namespace {

OpTemplate build(OpKind kind, obliv::NumericFormat fmt, bool on_bits) {
  CircuitBuilder b;
  OpTemplate t;
  const int w = fmt.width();
  const bool fixed = fmt.is_fixed();
  const int arity = obliv::op_arity(kind);

  if (kind == OpKind::kSelect) {
    const int ow = on_bits ? 1 : w;
    t.operand_widths = {1, ow, ow};
    const Wire c = b.input();
    const Bits x = b.inputs(ow), y = b.inputs(ow);
    t.result_width = ow;
    b.output(bits::MUX(b, c, x, y));
    t.circuit = b.finish();
    return t;
  }
  if (kind == OpKind::kCmpLt) {
    t.operand_widths = {w, w};
    const Bits x = b.inputs(w), y = b.inputs(w);
    t.result_width = 1;
    b.output(fixed ? fxc::less(b, x, y) : f32c::less(b, x, y));
    t.circuit = b.finish();
    return t;
  }

  t.operand_widths.assign(arity, w);
  t.result_width = w;
  t.sticky = fixed;
  const Bits x = b.inputs(w);
  const Bits y = arity > 1 ? b.inputs(w) : Bits{};
  const Wire sticky_in = fixed ? b.input() : kFalse;
  Bits r;
  if (!fixed) {
    switch (kind) {
      case OpKind::kAdd: r = f32c::add(b, x, y); break;
      case OpKind::kSub: r = f32c::sub(b, x, y); break;
      case OpKind::kMul: r = f32c::mul(b, x, y); break;
      case OpKind::kDiv: r = f32c::div(b, x, y); break;
      case OpKind::kSqrt: r = f32c::sqrt(b, x); break;
      case OpKind::kNeg: r = f32c::neg(b, x); break;
      case OpKind::kAbs: r = f32c::abs(b, x); break;
      default: throw CircuitError(std::string("no circuit for op ") + obliv::op_name(kind));
    }
    b.output(r);
  } else {
    const int f = fmt.frac_bits;
    Wire ovf = kFalse;
    switch (kind) {
      case OpKind::kAdd: r = fxc::add(b, x, y, &ovf); break;
      case OpKind::kSub: r = fxc::sub(b, x, y, &ovf); break;
      case OpKind::kMul: r = fxc::mul(b, x, y, f, &ovf); break;
      case OpKind::kDiv: r = fxc::div(b, x, y, f, &ovf); break;
      case OpKind::kSqrt: r = fxc::sqrt(b, x, f, &ovf); break;
      case OpKind::kNeg: r = fxc::neg(b, x, &ovf); break;
      case OpKind::kAbs: r = fxc::abs(b, x, &ovf); break;
      default: throw CircuitError(std::string("no circuit for op ") + obliv::op_name(kind));
    }
    b.output(r);
    b.output(b.OR(sticky_in, ovf));
  }
  t.circuit = b.finish();
  return t;
}

}  // namespace

const OpTemplate& op_template(OpKind kind, obliv::NumericFormat fmt, bool on_bits) {
  if (!op_has_template(kind)) throw CircuitError(std::string("op ") + obliv::op_name(kind) + " has no circuit");
  using Key = std::tuple<int, int, int, bool>;
  static std::mutex mu;
  static std::map<Key, std::unique_ptr<OpTemplate>> cache;
  const Key key{static_cast<int>(kind), static_cast<int>(fmt.kind), fmt.frac_bits,
                kind == OpKind::kSelect && on_bits};
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[key];
  if (!slot) slot = std::make_unique<OpTemplate>(build(kind, fmt, std::get<3>(key)));
  return *slot;
}

}  // namespace snail::gc

namespace snail::obliv {

GateCost gate_cost(OpKind kind, NumericFormat fmt, bool on_bits) {
  if (!gc::op_has_template(kind)) return {};
  const auto& t = gc::op_template(kind, fmt, on_bits);
  return {t.circuit.and_count(), t.circuit.xor_count()};
}

}  // namespace snail::obliv
