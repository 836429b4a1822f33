#pragma once

#include <array>
#include <span>
#include <vector>

#include "gc/block.hpp"
#include "gc/stream.hpp"

namespace snail::gc {

class OtError : public GcError {
 public:
  using GcError::GcError;
};

// Chou-Orlandi base OT over ristretto255, batched: one sender setup point,
// one receiver point per choice, two 16-byte ciphertexts per pair.
//
//   sender -> receiver : A = aG                       (32 bytes)
//   receiver -> sender : B_i = b_i G + c_i A          (32 bytes each)
//   sender -> receiver : m_i0 ^ H(aB_i), m_i1 ^ H(a(B_i − A))
class OtSender {
 public:
  OtSender();
  std::vector<uint8_t> setup() const;
  std::vector<uint8_t> respond(std::span<const uint8_t> receiver_msg, std::span<const std::array<Block, 2>> pairs) const;

 private:
  std::array<uint8_t, 32> a_{}, A_{};
};

class OtReceiver {
 public:
  explicit OtReceiver(std::span<const uint8_t> choices);
  std::vector<uint8_t> choose(std::span<const uint8_t> sender_setup);
  std::vector<Block> finish(std::span<const uint8_t> sender_response) const;

 private:
  std::vector<uint8_t> choices_;
  std::vector<std::array<uint8_t, 32>> b_;
  std::array<uint8_t, 32> A_{};
  std::vector<uint8_t> B_;
};

constexpr size_t kOtPointBytes = 32;

}  // namespace snail::gc
