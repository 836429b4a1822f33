#pragma once

#include <array>
#include <span>
#include <vector>

#include "gc/aes.hpp"
#include "gc/circuit.hpp"
#include "gc/compile.hpp"
#include "gc/stream.hpp"

namespace snail::gc {

struct GarbleSeed {
  Block seed;
  Block delta;  // lsb forced to 1

  static GarbleSeed random();
  static GarbleSeed from_bytes(std::span<const uint8_t> bytes);  // 32 bytes
  std::array<uint8_t, 32> to_bytes() const;
};

// Zero labels of circuit inputs and constants, derived from the seed with
// AES keyed by it. Used by the generator and, in seeded mode, by the client.
class LabelDeriver {
 public:
  explicit LabelDeriver(const GarbleSeed& s);
  Block input_zero(uint32_t i) const { return aes_.encrypt(Block{i, 0}); }
  Block input_label(uint32_t i, bool bit) const { return bit ? input_zero(i) ^ delta_ : input_zero(i); }
  Block const_zero(int v) const { return aes_.encrypt(Block{static_cast<uint64_t>(v), 1}); }
  // Labels the evaluator holds for the false and true constant wires.
  Block const_active(int v) const { return v ? const_zero(1) ^ delta_ : const_zero(0); }
  const Block& delta() const { return delta_; }

 private:
  Aes128 aes_;
  Block delta_;
};

// Per output bit, short hashes of the labels for 0 and for 1.
struct DecodeMap {
  std::vector<std::array<uint64_t, 2>> entries;

  std::vector<uint8_t> to_bytes() const;
  static DecodeMap from_bytes(std::span<const uint8_t> bytes);
  // Throws GcError when a label matches neither entry.
  std::vector<uint8_t> decode(std::span<const Block> labels) const;
};

uint64_t decode_hash(const Block& label, uint32_t index);

// Streams CIRCUIT_META then TABLE_CHUNK frames, two ciphertexts per AND gate
// in gate order. Returns the decode map for the outputs.
DecodeMap garble(const CompiledCircuit& c, const GarbleSeed& seed, const FrameSink& sink);
// Consumes the same frames and returns the active output labels.
std::vector<Block> evaluate(const CompiledCircuit& c, const FrameSource& src, std::span<const Block> input_labels);

// The same garbling over an explicit gate list. flatten(c) garbled here
// produces a stream byte-identical to garble(c, ...) apart from the digest.
DecodeMap garble(const BoolCircuit& c, const GarbleSeed& seed, const FrameSink& sink);
std::vector<Block> evaluate(const BoolCircuit& c, const FrameSource& src, std::span<const Block> input_labels);

// Active input labels for a plaintext assignment (generator view).
std::vector<Block> encode_inputs(const LabelDeriver& d, std::span<const uint8_t> bits);

}  // namespace snail::gc
