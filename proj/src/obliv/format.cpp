#include "obliv/format.hpp"

#include <bit>
#include <cmath>
#include <limits>

namespace snail::obliv {

NumericFormat NumericFormat::fixed64(int frac_bits) {
  if (frac_bits < 8 || frac_bits > 48)
    throw FormatError("fixed64 frac_bits must be in [8, 48], got " + std::to_string(frac_bits));
  return {FormatKind::kFixed64, frac_bits};
}

std::string NumericFormat::name() const {
  if (kind == FormatKind::kFloat32) return "float32";
  return "fixed64:" + std::to_string(frac_bits);
}

NumericFormat NumericFormat::parse(const std::string& s) {
  if (s == "float32") return float32();
  if (s == "fixed64") return fixed64();
  if (s.rfind("fixed64:", 0) == 0) return fixed64(std::stoi(s.substr(8)));
  throw FormatError("unknown numeric format '" + s + "'");
}

uint64_t encode(double v, NumericFormat fmt) {
  if (fmt.kind == FormatKind::kFloat32) {
    if (std::isfinite(v) && std::abs(v) > std::numeric_limits<float>::max())
      throw FormatError("format overflow at input");
    return std::bit_cast<uint32_t>(static_cast<float>(v));
  }
  const double limit = std::ldexp(1.0, 63 - fmt.frac_bits);
  if (!std::isfinite(v) || std::abs(v) >= limit) throw FormatError("format overflow at input");
  const double scaled = std::ldexp(v, fmt.frac_bits);
  // |scaled| < 2^63 here, but rounding can still reach 2^63 exactly.
  if (std::abs(scaled) >= 9223372036854775807.0) throw FormatError("format overflow at input");
  return static_cast<uint64_t>(std::llround(scaled));
}

double decode(uint64_t raw, NumericFormat fmt) {
  if (fmt.kind == FormatKind::kFloat32) return std::bit_cast<float>(static_cast<uint32_t>(raw));
  return std::ldexp(static_cast<double>(static_cast<int64_t>(raw)), -fmt.frac_bits);
}

ScalarLimits limits_for(NumericFormat fmt) {
  if (fmt.kind == FormatKind::kFloat32) {
    const double safmin = std::numeric_limits<float>::min();
    const double safmax = 1.0 / safmin;
    return {safmin, safmax, std::sqrt(safmin), std::sqrt(safmax / 2), 1e-30};
  }
  const double safmin = std::ldexp(1.0, -fmt.frac_bits);
  const double safmax = std::ldexp(1.0, 62 - fmt.frac_bits);
  // Constants below one ulp encode to zero, so tiny collapses to exact zero.
  return {safmin, safmax, std::sqrt(safmin), std::sqrt(safmax / 2), 0.0};
}

namespace f32 {
namespace {
float F(uint32_t a) { return std::bit_cast<float>(a); }
uint32_t canon(float r) { return std::isnan(r) ? kCanonicalNan : std::bit_cast<uint32_t>(r); }
}  // namespace

uint32_t add(uint32_t a, uint32_t b) { return canon(F(a) + F(b)); }
uint32_t sub(uint32_t a, uint32_t b) { return canon(F(a) - F(b)); }
uint32_t mul(uint32_t a, uint32_t b) { return canon(F(a) * F(b)); }
uint32_t div(uint32_t a, uint32_t b) { return canon(F(a) / F(b)); }
uint32_t sqrt(uint32_t a) { return canon(std::sqrt(F(a))); }

bool less(uint32_t a, uint32_t b) {
  const float x = F(a), y = F(b);
  if (std::isnan(x)) return false;
  if (std::isnan(y)) return true;
  return x < y;
}
}  // namespace f32

namespace fx {
using i128 = __int128;
using u128 = unsigned __int128;

Result add(int64_t a, int64_t b) {
  int64_t r;
  bool o = __builtin_add_overflow(a, b, &r);
  return {r, o};
}

Result sub(int64_t a, int64_t b) {
  int64_t r;
  bool o = __builtin_sub_overflow(a, b, &r);
  return {r, o};
}

Result mul(int64_t a, int64_t b, int frac) {
  const i128 p = static_cast<i128>(a) * b;
  const i128 q = p >> frac;  // arithmetic shift: floor
  const bool o = q > std::numeric_limits<int64_t>::max() || q < std::numeric_limits<int64_t>::min();
  return {static_cast<int64_t>(static_cast<uint64_t>(q)), o};
}

// Sign-magnitude division truncated toward zero. Quotient bits at 2^63 and
// above flag overflow; the low 64 bits are kept so the circuit can match.
Result div(int64_t a, int64_t b, int frac) {
  if (b == 0) return {0, true};
  const uint64_t ma = a < 0 ? 0 - static_cast<uint64_t>(a) : static_cast<uint64_t>(a);
  const uint64_t mb = b < 0 ? 0 - static_cast<uint64_t>(b) : static_cast<uint64_t>(b);
  const u128 q = (static_cast<u128>(ma) << frac) / mb;
  const bool o = (q >> 63) != 0;
  const uint64_t low = static_cast<uint64_t>(q);
  const bool negative = (a < 0) != (b < 0);
  return {static_cast<int64_t>(negative ? 0 - low : low), o};
}

Result sqrt(int64_t a, int frac) {
  if (a < 0) return {0, true};
  u128 rad = static_cast<u128>(static_cast<uint64_t>(a)) << frac;
  u128 root = 0, rem = 0;
  for (int i = 63; i >= 0; --i) {
    rem = (rem << 2) | ((rad >> (2 * i)) & 3);
    const u128 trial = (root << 2) | 1;
    root <<= 1;
    if (rem >= trial) {
      rem -= trial;
      root |= 1;
    }
  }
  return {static_cast<int64_t>(static_cast<uint64_t>(root)), false};
}

Result neg(int64_t a) {
  if (a == std::numeric_limits<int64_t>::min()) return {a, true};
  return {-a, false};
}

Result abs(int64_t a) { return a < 0 ? neg(a) : Result{a, false}; }
}  // namespace fx

}  // namespace snail::obliv
