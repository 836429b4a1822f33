#include "gc/circuit.hpp"

#include <algorithm>

namespace snail::gc {

uint64_t BoolCircuit::and_count() const {
  return std::count_if(gates.begin(), gates.end(), [](const Gate& g) { return g.kind == GateKind::kAnd; });
}

uint64_t BoolCircuit::xor_count() const { return gates.size() - and_count(); }

std::vector<uint8_t> BoolCircuit::eval(const std::vector<uint8_t>& in) const {
  if (in.size() != num_inputs) throw CircuitError("circuit input count mismatch");
  std::vector<uint8_t> w(num_wires());
  w[kFalse] = 0;
  w[kTrue] = 1;
  for (uint32_t i = 0; i < num_inputs; ++i) w[2 + i] = in[i] & 1;
  Wire out = first_gate_wire();
  for (const Gate& g : gates) w[out++] = g.kind == GateKind::kAnd ? (w[g.a] & w[g.b]) : (w[g.a] ^ w[g.b]);
  std::vector<uint8_t> r;
  r.reserve(outputs.size());
  for (Wire o : outputs) r.push_back(w[o]);
  return r;
}

Wire CircuitBuilder::input() {
  if (!c_.gates.empty()) throw CircuitError("inputs must precede gates");
  return 2 + c_.num_inputs++;
}

Bits CircuitBuilder::inputs(int n) {
  Bits b;
  for (int i = 0; i < n; ++i) b.push_back(input());
  return b;
}

Wire CircuitBuilder::emit(GateKind k, Wire a, Wire b) {
  c_.gates.push_back({k, a, b});
  return c_.first_gate_wire() + static_cast<Wire>(c_.gates.size()) - 1;
}

Wire CircuitBuilder::AND(Wire a, Wire b) {
  if (a == kFalse || b == kFalse) return kFalse;
  if (a == kTrue) return b;
  if (b == kTrue) return a;
  if (a == b) return a;
  return emit(GateKind::kAnd, a, b);
}

Wire CircuitBuilder::XOR(Wire a, Wire b) {
  if (a == kFalse) return b;
  if (b == kFalse) return a;
  if (a == b) return kFalse;
  if (a == kTrue && b == kTrue) return kFalse;
  return emit(GateKind::kXor, a, b);
}

Wire CircuitBuilder::OR(Wire a, Wire b) {
  if (a == kTrue || b == kTrue) return kTrue;
  if (a == kFalse) return b;
  if (b == kFalse) return a;
  if (a == b) return a;
  return XOR(XOR(a, b), AND(a, b));
}

Wire CircuitBuilder::MUX(Wire s, Wire a, Wire b) {
  if (s == kTrue) return a;
  if (s == kFalse) return b;
  if (a == b) return a;
  return XOR(b, AND(s, XOR(a, b)));
}

BoolCircuit CircuitBuilder::finish() { return std::move(c_); }

namespace bits {

Bits constant(uint64_t v, int width) {
  Bits r(width);
  for (int i = 0; i < width; ++i) r[i] = (i < 64 && ((v >> i) & 1)) ? kTrue : kFalse;
  return r;
}

Bits zext(const Bits& a, int width) {
  Bits r(a.begin(), a.begin() + std::min<size_t>(a.size(), width));
  r.resize(width, kFalse);
  return r;
}

Bits sext(const Bits& a, int width) {
  Bits r(a.begin(), a.begin() + std::min<size_t>(a.size(), width));
  r.resize(width, a.back());
  return r;
}

Bits slice(const Bits& a, int lo, int n) { return Bits(a.begin() + lo, a.begin() + lo + n); }

Bits concat(const Bits& lo, const Bits& hi) {
  Bits r = lo;
  r.insert(r.end(), hi.begin(), hi.end());
  return r;
}

Bits shl_const(const Bits& a, int k) {
  const int w = static_cast<int>(a.size());
  Bits r(w, kFalse);
  for (int i = k; i < w; ++i) r[i] = a[i - k];
  return r;
}

Bits shr_const(const Bits& a, int k) {
  const int w = static_cast<int>(a.size());
  Bits r(w, kFalse);
  for (int i = 0; i + k < w; ++i) r[i] = a[i + k];
  return r;
}

Bits NOT(CircuitBuilder& b, const Bits& a) {
  Bits r;
  for (Wire w : a) r.push_back(b.NOT(w));
  return r;
}

Bits XOR(CircuitBuilder& b, const Bits& a, const Bits& c) {
  Bits r;
  for (size_t i = 0; i < a.size(); ++i) r.push_back(b.XOR(a[i], c[i]));
  return r;
}

Bits AND(CircuitBuilder& b, Wire s, const Bits& a) {
  Bits r;
  for (Wire w : a) r.push_back(b.AND(s, w));
  return r;
}

Bits MUX(CircuitBuilder& b, Wire s, const Bits& a, const Bits& c) {
  if (a.size() != c.size()) throw CircuitError("mux width mismatch");
  Bits r;
  for (size_t i = 0; i < a.size(); ++i) r.push_back(b.MUX(s, a[i], c[i]));
  return r;
}

// Full adder with one AND: carry = c ⊕ ((x ⊕ c) ∧ (y ⊕ c)).
Bits add(CircuitBuilder& b, const Bits& x, const Bits& y, Wire cin, Wire* carry_out) {
  if (x.size() != y.size()) throw CircuitError("add width mismatch");
  Bits r;
  Wire c = cin;
  for (size_t i = 0; i < x.size(); ++i) {
    const Wire xc = b.XOR(x[i], c);
    const Wire yc = b.XOR(y[i], c);
    r.push_back(b.XOR(xc, y[i]));
    if (i + 1 < x.size() || carry_out) c = b.XOR(c, b.AND(xc, yc));
  }
  if (carry_out) *carry_out = c;
  return r;
}

Bits sub(CircuitBuilder& b, const Bits& x, const Bits& y, Wire* borrow_out) {
  Wire carry = kFalse;
  Bits r = add(b, x, NOT(b, y), kTrue, borrow_out ? &carry : nullptr);
  if (borrow_out) *borrow_out = b.NOT(carry);
  return r;
}

Bits negate(CircuitBuilder& b, const Bits& x) { return sub(b, constant(0, static_cast<int>(x.size())), x); }

Bits increment(CircuitBuilder& b, const Bits& x, Wire inc) {
  Bits r;
  Wire c = inc;
  for (size_t i = 0; i < x.size(); ++i) {
    r.push_back(b.XOR(x[i], c));
    if (i + 1 < x.size()) c = b.AND(x[i], c);
  }
  return r;
}

// Borrow of x − y: the complement of the carry out of x + ¬y + 1.
Wire less_unsigned(CircuitBuilder& b, const Bits& x, const Bits& y) {
  if (x.size() != y.size()) throw CircuitError("compare width mismatch");
  Wire c = kTrue;
  for (size_t i = 0; i < x.size(); ++i) {
    const Wire xc = b.XOR(x[i], c);
    const Wire yc = b.XOR(b.NOT(y[i]), c);
    c = b.XOR(c, b.AND(xc, yc));
  }
  return b.NOT(c);
}

Wire less_signed(CircuitBuilder& b, const Bits& x, const Bits& y) {
  // Flipping the sign bits maps two's complement order onto unsigned order.
  Bits xs = x, ys = y;
  xs.back() = b.NOT(xs.back());
  ys.back() = b.NOT(ys.back());
  return less_unsigned(b, xs, ys);
}

Wire any(CircuitBuilder& b, const Bits& x) {
  if (x.empty()) return kFalse;
  // Balanced tree keeps depth logarithmic; gate count is the same.
  Bits level = x;
  while (level.size() > 1) {
    Bits next;
    for (size_t i = 0; i + 1 < level.size(); i += 2) next.push_back(b.OR(level[i], level[i + 1]));
    if (level.size() % 2) next.push_back(level.back());
    level.swap(next);
  }
  return level[0];
}

Wire equal(CircuitBuilder& b, const Bits& x, const Bits& y) { return b.NOT(any(b, XOR(b, x, y))); }

Bits shr_jam(CircuitBuilder& b, const Bits& x, const Bits& amount) {
  const int w = static_cast<int>(x.size());
  Bits r = x;
  Wire big = kFalse;
  for (size_t i = 0; i < amount.size(); ++i) {
    const int k = i < 31 ? (1 << i) : w;
    if (k >= w) {
      big = b.OR(big, amount[i]);
      continue;
    }
    Bits shifted = shr_const(r, k);
    shifted[0] = b.OR(shifted[0], any(b, slice(r, 0, k)));
    r = MUX(b, amount[i], shifted, r);
  }
  if (big != kFalse) {
    Bits all = constant(0, w);
    all[0] = any(b, x);
    r = MUX(b, big, all, r);
  }
  return r;
}

Bits normalize_left(CircuitBuilder& b, const Bits& x, Bits& shift) {
  const int w = static_cast<int>(x.size());
  int top = 1;
  while (top * 2 < w) top *= 2;
  Bits r = x;
  shift.clear();
  for (int k = top; k >= 1; k /= 2) {
    const Wire z = b.NOT(any(b, slice(r, w - k, k)));
    r = MUX(b, z, shl_const(r, k), r);
    shift.insert(shift.begin(), z);
  }
  return r;
}

Bits mul_unsigned(CircuitBuilder& b, const Bits& x, const Bits& y) {
  const int n = static_cast<int>(x.size()), m = static_cast<int>(y.size());
  Bits acc = AND(b, y[0], x);
  acc.resize(n + m, kFalse);
  for (int j = 1; j < m; ++j) {
    const Bits row = AND(b, y[j], x);
    Wire carry = kFalse;
    const Bits s = add(b, slice(acc, j, n), row, kFalse, &carry);
    for (int i = 0; i < n; ++i) acc[j + i] = s[i];
    acc[j + n] = carry;
  }
  return acc;
}

}  // namespace bits

}  // namespace snail::gc
