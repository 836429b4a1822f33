#pragma once

#include <array>
#include <memory>
#include <vector>

#include "gc/circuit.hpp"
#include "gc/op_templates.hpp"
#include "obliv/tape.hpp"

namespace snail::gc {

struct CompiledStep {
  const OpTemplate* tmpl;
  uint32_t slot;
  uint32_t operands[3];
};

// A tape bound to its op circuits. Gates are produced template by template in
// tape order, so garbling can stream without materializing the whole circuit.
struct CompiledCircuit {
  std::shared_ptr<const obliv::ObliviousTape> tape;
  std::vector<CompiledStep> steps;
  std::vector<uint32_t> slot_offset;  // first label index of each slot
  std::vector<uint8_t> slot_width;
  uint32_t label_count = 0;
  uint32_t input_bits = 0;
  uint32_t output_bits = 0;  // tape outputs, then the sticky flag if fixed
  bool sticky = false;
  uint64_t and_gates = 0;
  uint64_t xor_gates = 0;
  std::array<uint8_t, 32> digest{};

  obliv::NumericFormat format() const { return tape->format; }
};

CompiledCircuit compile(std::shared_ptr<const obliv::ObliviousTape> tape);
CompiledCircuit compile(const obliv::ObliviousTape& tape);

// The whole circuit as one gate list, in exactly the streaming gate order.
BoolCircuit flatten(const CompiledCircuit& c);

// Raw tape input words to circuit input bits, and circuit output bits back to
// words plus the sticky overflow flag.
std::vector<uint8_t> input_bits(const CompiledCircuit& c, std::span<const uint64_t> words);
struct DecodedOutputs {
  std::vector<uint64_t> words;
  bool overflow = false;
};
DecodedOutputs output_words(const CompiledCircuit& c, const std::vector<uint8_t>& bits);

// Plaintext evaluation of the compiled circuit, template by template.
std::vector<uint8_t> eval_plain(const CompiledCircuit& c, const std::vector<uint8_t>& inputs);

}  // namespace snail::gc
