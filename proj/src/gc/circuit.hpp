#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace snail::gc {

using Wire = uint32_t;
constexpr Wire kFalse = 0;
constexpr Wire kTrue = 1;

enum class GateKind : uint8_t { kAnd = 0, kXor = 1 };

// Gate i writes wire first_gate_wire() + i. NOT is XOR with kTrue.
struct Gate {
  GateKind kind;
  Wire a, b;
};

// Wires 0 and 1 are the constants, then the inputs, then one wire per gate.
struct BoolCircuit {
  uint32_t num_inputs = 0;
  std::vector<Gate> gates;
  std::vector<Wire> outputs;

  Wire first_input_wire() const { return 2; }
  Wire first_gate_wire() const { return 2 + num_inputs; }
  uint32_t num_wires() const { return 2 + num_inputs + static_cast<uint32_t>(gates.size()); }
  uint64_t and_count() const;
  uint64_t xor_count() const;

  // Plaintext evaluation.
  std::vector<uint8_t> eval(const std::vector<uint8_t>& inputs) const;
};

class CircuitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Bits = std::vector<Wire>;  // lsb first

// Builds a circuit gate by gate, folding constant operands. All inputs must
// be declared before the first gate.
class CircuitBuilder {
 public:
  Wire input();
  Bits inputs(int n);
  Wire AND(Wire a, Wire b);
  Wire XOR(Wire a, Wire b);
  Wire NOT(Wire a) { return XOR(a, kTrue); }
  Wire OR(Wire a, Wire b);
  // s ? a : b
  Wire MUX(Wire s, Wire a, Wire b);
  void output(Wire w) { c_.outputs.push_back(w); }
  void output(const Bits& b) { c_.outputs.insert(c_.outputs.end(), b.begin(), b.end()); }
  BoolCircuit finish();

 private:
  Wire emit(GateKind k, Wire a, Wire b);
  BoolCircuit c_;
};

// Word-level helpers over bit vectors.
namespace bits {

Bits constant(uint64_t v, int width);
Bits zext(const Bits& a, int width);
Bits sext(const Bits& a, int width);
Bits slice(const Bits& a, int lo, int n);
Bits concat(const Bits& lo, const Bits& hi);
Bits shl_const(const Bits& a, int k);  // keeps width
Bits shr_const(const Bits& a, int k);  // logical, keeps width

Bits NOT(CircuitBuilder& b, const Bits& a);
Bits XOR(CircuitBuilder& b, const Bits& a, const Bits& c);
Bits AND(CircuitBuilder& b, Wire s, const Bits& a);
Bits MUX(CircuitBuilder& b, Wire s, const Bits& a, const Bits& c);

// Sum of equal-width vectors, returns width bits; carry_out optional.
Bits add(CircuitBuilder& b, const Bits& x, const Bits& y, Wire cin = kFalse, Wire* carry_out = nullptr);
// x − y; borrow_out set when x < y as unsigned.
Bits sub(CircuitBuilder& b, const Bits& x, const Bits& y, Wire* borrow_out = nullptr);
Bits negate(CircuitBuilder& b, const Bits& x);
Bits increment(CircuitBuilder& b, const Bits& x, Wire inc);
Wire less_unsigned(CircuitBuilder& b, const Bits& x, const Bits& y);
Wire less_signed(CircuitBuilder& b, const Bits& x, const Bits& y);
Wire any(CircuitBuilder& b, const Bits& x);
Wire equal(CircuitBuilder& b, const Bits& x, const Bits& y);

// Logical right shift by a variable amount; bits shifted out are ORed into
// the lsb of the result (jamming). Amounts ≥ width yield (x ≠ 0).
Bits shr_jam(CircuitBuilder& b, const Bits& x, const Bits& amount);
// Shifts x left until its msb is set (or x is exhausted); returns the shift
// count in `shift` with ceil(log2(width+1)) bits.
Bits normalize_left(CircuitBuilder& b, const Bits& x, Bits& shift);
// Unsigned product, x.size() + y.size() bits.
Bits mul_unsigned(CircuitBuilder& b, const Bits& x, const Bits& y);

}  // namespace bits

}  // namespace snail::gc
