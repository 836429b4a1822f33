#include "gc/arith_circuits.hpp"

namespace snail::gc::f32c {

using namespace bits;

namespace {

struct Unpacked {
  Wire sign, nan, inf, zero, exp_zero;
  Bits exp;  // biased exponent, 8 bits; 1 for subnormals
  Bits sig;  // 24 bits including the hidden bit
};

Unpacked unpack(CircuitBuilder& b, const Bits& x) {
  Unpacked u;
  const Bits frac = slice(x, 0, 23);
  const Bits e = slice(x, 23, 8);
  u.sign = x[31];
  u.exp_zero = b.NOT(any(b, e));
  const Wire exp_max = b.NOT(any(b, NOT(b, e)));
  const Wire frac_zero = b.NOT(any(b, frac));
  u.nan = b.AND(exp_max, b.NOT(frac_zero));
  u.inf = b.AND(exp_max, frac_zero);
  u.zero = b.AND(u.exp_zero, frac_zero);
  u.exp = e;
  u.exp[0] = b.OR(e[0], u.exp_zero);
  u.sig = frac;
  u.sig.push_back(b.NOT(u.exp_zero));
  return u;
}

// Normalizes a subnormal significand; returns the signed 10-bit exponent.
Bits normalize_sig(CircuitBuilder& b, const Unpacked& u, Bits& sig) {
  Bits shift;
  sig = normalize_left(b, u.sig, shift);
  return bits::sub(b, zext(u.exp, 10), zext(shift, 10));
}

Bits pack_special(uint32_t v) { return constant(v, 32); }

Bits with_sign(const Bits& v, Wire s) {
  Bits r = v;
  r[31] = s;
  return r;
}

// `exp` is the biased exponent minus one as a signed 10-bit value; `sig`
// carries the leading one at bit 30 (or lower only when exp ≤ 0) and seven
// rounding bits.
Bits round_pack(CircuitBuilder& b, Wire sign, const Bits& exp, const Bits& sig) {
  const Wire negative = exp[9];
  Bits s = MUX(b, negative, shr_jam(b, sig, negate(b, exp)), sig);
  const Bits e = AND(b, b.NOT(negative), slice(exp, 0, 8));

  // Overflow to infinity, decided before the subnormal shift is applied.
  const Wire exp_gt = less_signed(b, constant(0xFD, 10), exp);
  const Wire exp_eq = equal(b, exp, constant(0xFD, 10));
  const Bits sig_inc = bits::add(b, zext(sig, 33), constant(0x40, 33));
  const Wire carry_out = b.OR(sig_inc[31], sig_inc[32]);
  const Wire overflow = b.OR(exp_gt, b.AND(exp_eq, carry_out));

  const Bits round_bits = slice(s, 0, 7);
  const Wire tie = equal(b, round_bits, constant(0x40, 7));
  Bits r = slice(bits::add(b, s, constant(0x40, 32)), 7, 25);
  r[0] = b.AND(r[0], b.NOT(tie));
  const Wire r_zero = b.NOT(any(b, r));
  const Bits e2 = AND(b, b.NOT(r_zero), e);

  Bits packed = slice(r, 0, 23);
  const Bits hi = bits::add(b, e2, zext(slice(r, 23, 2), 8));
  packed.insert(packed.end(), hi.begin(), hi.end());
  packed.push_back(sign);
  return MUX(b, overflow, with_sign(pack_special(0x7F800000u), sign), packed);
}

Bits finish(CircuitBuilder& b, const Bits& value, Wire nan, Wire inf, Wire inf_sign, Wire zero, Wire zero_sign) {
  Bits r = MUX(b, zero, with_sign(pack_special(0), zero_sign), value);
  r = MUX(b, inf, with_sign(pack_special(0x7F800000u), inf_sign), r);
  return MUX(b, nan, pack_special(0x7FC00000u), r);
}

}  // namespace

Bits add(CircuitBuilder& b, const Bits& x, const Bits& y) {
  // Order the operands by magnitude so the exponent difference is nonnegative.
  const Wire swap = less_unsigned(b, slice(x, 0, 31), slice(y, 0, 31));
  const Bits d = AND(b, swap, XOR(b, x, y));
  const Bits xa = XOR(b, x, d), xb = XOR(b, y, d);
  const Unpacked a = unpack(b, xa), c = unpack(b, xb);
  const Wire eff_sub = b.XOR(a.sign, c.sign);

  const Bits diff = bits::sub(b, a.exp, c.exp);
  const Bits sa = shl_const(zext(a.sig, 32), 6);
  const Bits sb = shr_jam(b, shl_const(zext(c.sig, 32), 6), diff);
  // sa ± sb, subtraction as sa + ¬sb + 1.
  Bits sb_signed;
  for (Wire w : sb) sb_signed.push_back(b.XOR(w, eff_sub));
  const Bits sum = bits::add(b, sa, sb_signed, eff_sub);
  const Wire sum_zero = b.NOT(any(b, sum));

  Bits shift;
  Bits norm = normalize_left(b, slice(sum, 0, 31), shift);
  norm.push_back(kFalse);
  const Bits exp = bits::sub(b, zext(a.exp, 10), zext(shift, 10));
  const Bits value = round_pack(b, a.sign, exp, norm);

  const Wire nan = b.OR(b.OR(a.nan, c.nan), b.AND(b.AND(a.inf, c.inf), eff_sub));
  return finish(b, value, nan, a.inf, a.sign, sum_zero, b.AND(a.sign, c.sign));
}

Bits sub(CircuitBuilder& b, const Bits& x, const Bits& y) { return add(b, x, neg(b, y)); }

Bits mul(CircuitBuilder& b, const Bits& x, const Bits& y) {
  const Unpacked a = unpack(b, x), c = unpack(b, y);
  const Wire sign = b.XOR(a.sign, c.sign);
  Bits na, nc;
  const Bits ea = normalize_sig(b, a, na);
  const Bits ec = normalize_sig(b, c, nc);
  const Bits p = mul_unsigned(b, na, nc);  // leading one at bit 47 or 46
  const Wire hi = p[47];

  const Wire s16 = any(b, slice(p, 0, 16));
  const Wire s17 = b.OR(s16, p[16]);
  Bits sig_hi = slice(p, 17, 31);
  sig_hi[0] = b.OR(sig_hi[0], s17);
  sig_hi.push_back(kFalse);
  Bits sig_lo = slice(p, 16, 32);
  sig_lo[0] = b.OR(sig_lo[0], s16);
  const Bits sig = MUX(b, hi, sig_hi, sig_lo);

  // exp = ea + ec − 128 + hi
  Bits exp = bits::add(b, ea, ec, hi);
  exp = bits::sub(b, exp, constant(128, 10));
  const Bits value = round_pack(b, sign, exp, sig);

  const Wire nan = b.OR(b.OR(a.nan, c.nan), b.OR(b.AND(a.inf, c.zero), b.AND(a.zero, c.inf)));
  return finish(b, value, nan, b.OR(a.inf, c.inf), sign, b.OR(a.zero, c.zero), sign);
}

Bits div(CircuitBuilder& b, const Bits& x, const Bits& y) {
  const Unpacked a = unpack(b, x), c = unpack(b, y);
  const Wire sign = b.XOR(a.sign, c.sign);
  Bits na, nc;
  const Bits ea = normalize_sig(b, a, na);
  const Bits ec = normalize_sig(b, c, nc);
  const Wire lt = less_unsigned(b, na, nc);

  // Restoring division; the partial remainder stays in [0, 2·divisor).
  const Bits divisor = zext(nc, 26);
  Bits r = MUX(b, lt, shl_const(zext(na, 26), 1), zext(na, 26));
  Bits q(31);
  for (int i = 30; i >= 0; --i) {
    Wire borrow;
    const Bits diff = bits::sub(b, r, divisor, &borrow);
    const Wire ge = b.NOT(borrow);
    q[i] = ge;
    r = MUX(b, ge, diff, r);
    if (i > 0) r = shl_const(r, 1);
  }
  Bits sig = q;
  sig[0] = b.OR(sig[0], any(b, r));
  sig.push_back(kFalse);

  // exp = ea − ec + 126 − lt
  Bits exp = bits::sub(b, ea, ec);
  exp = bits::add(b, exp, constant(126, 10));
  exp = bits::sub(b, exp, zext(Bits{lt}, 10));
  const Bits value = round_pack(b, sign, exp, sig);

  const Wire nan = b.OR(b.OR(a.nan, c.nan), b.OR(b.AND(a.zero, c.zero), b.AND(a.inf, c.inf)));
  return finish(b, value, nan, b.OR(a.inf, c.zero), sign, b.OR(a.zero, c.inf), sign);
}

Bits sqrt(CircuitBuilder& b, const Bits& x) {
  const Unpacked a = unpack(b, x);
  Bits na;
  const Bits ea = normalize_sig(b, a, na);
  // (ea − 127) odd exactly when ea is even.
  const Wire odd = b.NOT(ea[0]);
  const Bits rad = MUX(b, odd, shl_const(zext(na, 62), 38), shl_const(zext(na, 62), 37));

  // Digit-by-digit square root, one result bit per radicand bit pair. After t
  // steps the remainder fits in t + 1 bits, so widths grow with t.
  Bits root, rem;
  for (int t = 1; t <= 31; ++t) {
    const int w = t + 2;
    Bits cur = {rad[2 * (31 - t)], rad[2 * (31 - t) + 1]};
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
  Bits sig = root;
  sig[0] = b.OR(sig[0], any(b, rem));
  sig.push_back(kFalse);

  // exp = floor((ea − 127) / 2) + 126
  const Bits centered = bits::sub(b, ea, constant(127, 10));
  Bits half = shr_const(centered, 1);
  half[9] = centered[9];
  const Bits exp = bits::add(b, half, constant(126, 10));
  const Bits value = round_pack(b, kFalse, exp, sig);

  const Wire nan = b.OR(a.nan, b.AND(a.sign, b.NOT(a.zero)));
  return finish(b, value, nan, a.inf, kFalse, a.zero, a.sign);
}

Bits neg(CircuitBuilder& b, const Bits& x) {
  Bits r = x;
  r[31] = b.NOT(x[31]);
  return r;
}

Bits abs(CircuitBuilder&, const Bits& x) {
  Bits r = x;
  r[31] = kFalse;
  return r;
}

Wire less(CircuitBuilder& b, const Bits& x, const Bits& y) {
  const Unpacked a = unpack(b, x), c = unpack(b, y);
  // Order-preserving keys: negative values complement, positives set the top
  // bit. Zeros drop their sign first.
  auto key = [&](const Bits& v, const Unpacked& u) {
    const Wire s = b.AND(u.sign, b.NOT(u.zero));
    Bits k;
    for (int i = 0; i < 31; ++i) k.push_back(b.XOR(v[i], s));
    k.push_back(b.NOT(s));
    return k;
  };
  const Wire lt = less_unsigned(b, key(x, a), key(y, c));
  // a NaN → false; b NaN (a not NaN) → true.
  return b.AND(b.NOT(a.nan), b.OR(c.nan, lt));
}

}  // namespace snail::gc::f32c
