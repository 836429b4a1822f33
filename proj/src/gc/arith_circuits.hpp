#pragma once

#include "gc/circuit.hpp"

namespace snail::gc {

// IEEE-754 binary32, round to nearest even, subnormals kept, every NaN result
// is the canonical quiet NaN 0x7FC00000.
namespace f32c {
Bits add(CircuitBuilder& b, const Bits& x, const Bits& y);
Bits sub(CircuitBuilder& b, const Bits& x, const Bits& y);
Bits mul(CircuitBuilder& b, const Bits& x, const Bits& y);
Bits div(CircuitBuilder& b, const Bits& x, const Bits& y);
Bits sqrt(CircuitBuilder& b, const Bits& x);
Bits neg(CircuitBuilder& b, const Bits& x);
Bits abs(CircuitBuilder& b, const Bits& x);
// Total order: NaN above everything, −0 equal to +0.
Wire less(CircuitBuilder& b, const Bits& x, const Bits& y);
}  // namespace f32c

// Two's complement 64-bit fixed point with `frac` fractional bits. Each op
// returns its result and raises *overflow on wrap-around.
namespace fxc {
Bits add(CircuitBuilder& b, const Bits& x, const Bits& y, Wire* overflow);
Bits sub(CircuitBuilder& b, const Bits& x, const Bits& y, Wire* overflow);
Bits mul(CircuitBuilder& b, const Bits& x, const Bits& y, int frac, Wire* overflow);
Bits div(CircuitBuilder& b, const Bits& x, const Bits& y, int frac, Wire* overflow);
Bits sqrt(CircuitBuilder& b, const Bits& x, int frac, Wire* overflow);
Bits neg(CircuitBuilder& b, const Bits& x, Wire* overflow);
Bits abs(CircuitBuilder& b, const Bits& x, Wire* overflow);
Wire less(CircuitBuilder& b, const Bits& x, const Bits& y);
}  // namespace fxc

}  // namespace snail::gc
