#pragma once

#include <cstdint>
#include <cstring>

namespace snail::gc {

// 128-bit wire label. The permute bit is the lsb of lo.
struct Block {
  uint64_t lo = 0, hi = 0;

  bool lsb() const { return lo & 1; }
  friend Block operator^(const Block& a, const Block& b) { return {a.lo ^ b.lo, a.hi ^ b.hi}; }
  Block& operator^=(const Block& o) {
    lo ^= o.lo;
    hi ^= o.hi;
    return *this;
  }
  friend bool operator==(const Block&, const Block&) = default;

  void to_bytes(uint8_t* out) const {
    std::memcpy(out, &lo, 8);
    std::memcpy(out + 8, &hi, 8);
  }
  static Block from_bytes(const uint8_t* in) {
    Block b;
    std::memcpy(&b.lo, in, 8);
    std::memcpy(&b.hi, in + 8, 8);
    return b;
  }
};

inline Block select_mask(bool bit, const Block& b) { return bit ? b : Block{}; }

}  // namespace snail::gc
