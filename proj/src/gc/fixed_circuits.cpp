#include "gc/arith_circuits.hpp"

namespace snail::gc::fxc {

using namespace bits;

namespace {

Wire is_min(CircuitBuilder& b, const Bits& x) { return b.AND(x[63], b.NOT(any(b, slice(x, 0, 63)))); }

// Conditional two's complement negation: (x ⊕ s) + s.
Bits cond_negate(CircuitBuilder& b, Wire s, const Bits& x) {
  Bits t;
  for (Wire w : x) t.push_back(b.XOR(w, s));
  return increment(b, t, s);
}

// Digit-by-digit integer square root of `rad`, which has `pairs` bit pairs.
Bits isqrt(CircuitBuilder& b, const Bits& rad, int pairs) {
  Bits root, rem;
  for (int t = 1; t <= pairs; ++t) {
    const int w = t + 2;
    Bits cur = {rad[2 * (pairs - t)], rad[2 * (pairs - t) + 1]};
    cur.insert(cur.end(), rem.begin(), rem.end());
    cur = zext(cur, w);
    Bits trial = {kTrue, kFalse};
    trial.insert(trial.end(), root.begin(), root.end());
    trial = zext(trial, w);
    Wire borrow;
    const Bits diff = bits::sub(b, cur, trial, &borrow);
    const Wire ge = b.NOT(borrow);
    rem = MUX(b, ge, diff, cur);
    root.insert(root.begin(), ge);
  }
  return root;
}

}  // namespace

Bits add(CircuitBuilder& b, const Bits& x, const Bits& y, Wire* overflow) {
  const Bits s = bits::add(b, x, y);
  *overflow = b.AND(b.NOT(b.XOR(x[63], y[63])), b.XOR(s[63], x[63]));
  return s;
}

Bits sub(CircuitBuilder& b, const Bits& x, const Bits& y, Wire* overflow) {
  const Bits s = bits::sub(b, x, y);
  *overflow = b.AND(b.XOR(x[63], y[63]), b.XOR(s[63], x[63]));
  return s;
}

Bits mul(CircuitBuilder& b, const Bits& x, const Bits& y, int frac, Wire* overflow) {
  // Unsigned 128-bit product, then the signed correction of the high half.
  Bits p = mul_unsigned(b, x, y);
  Bits hi = slice(p, 64, 64);
  hi = bits::sub(b, hi, AND(b, x[63], y));
  hi = bits::sub(b, hi, AND(b, y[63], x));
  for (int i = 0; i < 64; ++i) p[64 + i] = hi[i];
  // floor(p / 2^frac) must fit in 64 bits: bits frac+63 .. 127 all equal.
  Bits diff;
  for (int i = frac + 63; i < 127; ++i) diff.push_back(b.XOR(p[i], p[127]));
  *overflow = any(b, diff);
  return slice(p, frac, 64);
}

Bits div(CircuitBuilder& b, const Bits& x, const Bits& y, int frac, Wire* overflow) {
  const Wire neg = b.XOR(x[63], y[63]);
  const Bits ma = cond_negate(b, x[63], x);
  const Bits mb = cond_negate(b, y[63], y);
  const Wire b_zero = b.NOT(any(b, y));

  // Restoring division of ma·2^frac by mb, most significant quotient bit first.
  const int qbits = 64 + frac;
  const Bits dividend = concat(constant(0, frac), ma);
  const Bits divisor = zext(mb, 65);
  Bits r = constant(0, 65);
  Bits q(qbits);
  for (int i = qbits - 1; i >= 0; --i) {
    r = shl_const(r, 1);
    r[0] = dividend[i];
    Wire borrow;
    const Bits d = bits::sub(b, r, divisor, &borrow);
    const Wire ge = b.NOT(borrow);
    q[i] = ge;
    r = MUX(b, ge, d, r);
  }
  *overflow = b.OR(any(b, slice(q, 63, qbits - 63)), b_zero);
  const Bits low = cond_negate(b, neg, slice(q, 0, 64));
  return AND(b, b.NOT(b_zero), low);
}

Bits sqrt(CircuitBuilder& b, const Bits& x, int frac, Wire* overflow) {
  const Wire negative = x[63];
  // x < 2^63, so x·2^frac has at most 63 + frac bits.
  const int pairs = (63 + frac + 1) / 2;
  const Bits rad = zext(concat(constant(0, frac), slice(x, 0, 63)), 2 * pairs);
  const Bits root = zext(isqrt(b, rad, pairs), 64);
  *overflow = negative;
  return AND(b, b.NOT(negative), root);
}

Bits neg(CircuitBuilder& b, const Bits& x, Wire* overflow) {
  *overflow = is_min(b, x);
  return negate(b, x);
}

Bits abs(CircuitBuilder& b, const Bits& x, Wire* overflow) {
  *overflow = is_min(b, x);
  return cond_negate(b, x[63], x);
}

Wire less(CircuitBuilder& b, const Bits& x, const Bits& y) { return less_signed(b, x, y); }

}  // namespace snail::gc::fxc
