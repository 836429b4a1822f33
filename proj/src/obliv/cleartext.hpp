#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "obliv/tape.hpp"

namespace snail::obliv {

struct CostReport {
  uint64_t and_gates = 0;
  uint64_t xor_gates = 0;
  uint64_t bytes_tx = 0;  // garbled-table bytes, generator to evaluator
  uint64_t rounds = 0;

  CostReport& operator+=(const CostReport& o);
  friend bool operator==(const CostReport&, const CostReport&) = default;
};

struct GateCost {
  uint64_t and_gates = 0;
  uint64_t xor_gates = 0;
};

// Gate count of one op's circuit. Provided by the garbled-circuit compiler,
// which builds the op templates and counts their gates.
GateCost gate_cost(OpKind kind, NumericFormat fmt, bool on_bits = false);

struct OpHistogram {
  std::array<uint64_t, kNumOpKinds> counts{};
  uint64_t operator[](OpKind k) const { return counts[static_cast<int>(k)]; }
  uint64_t arithmetic_total() const;
};
OpHistogram op_histogram(const ObliviousTape& t);

// Static cost of one garbled evaluation of the tape (no framing).
CostReport tape_cost(const ObliviousTape& t);

struct CleartextResult {
  std::vector<uint64_t> outputs;
  bool overflow = false;
  CostReport cost;
};

// Reference interpreter. Inputs are raw format words in input-slot order.
CleartextResult run_cleartext(const ObliviousTape& t, std::span<const uint64_t> inputs);

std::vector<uint64_t> encode_all(std::span<const double> v, NumericFormat fmt);
std::vector<double> decode_all(std::span<const uint64_t> raw, NumericFormat fmt);

}  // namespace snail::obliv
