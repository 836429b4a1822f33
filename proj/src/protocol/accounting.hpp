#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gc/garble.hpp"

namespace snail::protocol {

constexpr uint64_t kKappa = 128;  // label length in bits

struct CommReport {
  uint64_t client_tx_bits = 0;
  uint64_t client_rx_bits = 0;
  uint64_t server_tx_bits = 0;
  uint64_t rounds = 0;

  CommReport& operator+=(const CommReport& o);
  friend bool operator==(const CommReport&, const CommReport&) = default;
};

struct EncodedInputs {
  std::vector<gc::Block> labels;  // one active label per input bit
  CommReport report;
};

// The generator ships both labels of every input wire to the client, who
// forwards the one matching its bit.
EncodedInputs client_encode_naive(std::span<const uint8_t> bits, std::span<const std::array<gc::Block, 2>> pairs);
// The client receives only the seed material and derives labels itself.
EncodedInputs client_encode_seeded(std::span<const uint8_t> bits, const gc::GarbleSeed& seed);

// Label pairs for inputs [first, first + count) as the generator derives them.
std::vector<std::array<gc::Block, 2>> label_pairs(const gc::LabelDeriver& d, uint32_t first, uint32_t count);

// Framed bytes of one garbled circuit sent as nested GC_STREAM messages.
uint64_t garbled_message_bytes(uint64_t and_gates);

// Lower bound on an offload server's uncertainty: the chance of correctly
// naming the number of images in a stream of o invocations with at most c
// iterations per image, 1 / (o − o/c). The negligible cryptographic term is
// not included.
struct PrivacyBound {
  uint64_t o = 0;
  uint64_t c = 0;
  double bound = 0;
  bool insufficient_stream = false;  // o ≤ c
  std::string describe() const;
};
PrivacyBound privacy_bound(uint64_t o, uint64_t c);

}  // namespace snail::protocol
