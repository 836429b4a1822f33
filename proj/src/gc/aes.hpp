#pragma once

#include <cstddef>
#include <cstdint>

#include "gc/block.hpp"

namespace snail::gc {

// AES-128 with an expanded key; AES-NI only.
class Aes128 {
 public:
  explicit Aes128(const Block& key);
  Block encrypt(const Block& in) const;
  void encrypt_n(const Block* in, Block* out, size_t n) const;
  const uint8_t* round_keys() const { return rk_; }

 private:
  alignas(16) uint8_t rk_[11 * 16];
};

// Tweakable correlation-robust hash H(x, i) = π(σ(x) ⊕ i) ⊕ σ(x) ⊕ i with π a
// fixed-key AES and σ(hi‖lo) = (hi ⊕ lo)‖hi. The tweak fills both halves.
Block tweak_hash(const Block& x, uint64_t tweak);
// Two hashes per call so the AES rounds pipeline.
void tweak_hash2(const Block& x0, uint64_t t0, const Block& x1, uint64_t t1, Block& out0, Block& out1);
void tweak_hash4(const Block* x, const uint64_t* tweaks, Block* out);

bool aes_ni_available();

}  // namespace snail::gc
