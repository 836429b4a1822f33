#include "protocol/accounting.hpp"

#include <cstdio>

#include "protocol/messages.hpp"

namespace snail::protocol {

CommReport& CommReport::operator+=(const CommReport& o) {
  client_tx_bits += o.client_tx_bits;
  client_rx_bits += o.client_rx_bits;
  server_tx_bits += o.server_tx_bits;
  rounds += o.rounds;
  return *this;
}

EncodedInputs client_encode_naive(std::span<const uint8_t> bits, std::span<const std::array<gc::Block, 2>> pairs) {
  if (bits.size() != pairs.size())
    throw ProtocolError("naive encoding needs one label pair per input bit (" + std::to_string(bits.size()) +
                        " bits, " + std::to_string(pairs.size()) + " pairs)");
  EncodedInputs e;
  e.labels.reserve(bits.size());
  for (size_t i = 0; i < bits.size(); ++i) e.labels.push_back(pairs[i][bits[i] & 1]);
  e.report.client_rx_bits = 2 * kKappa * bits.size();
  e.report.server_tx_bits = e.report.client_rx_bits;
  e.report.client_tx_bits = kKappa * bits.size();
  e.report.rounds = bits.empty() ? 0 : 1;
  return e;
}

EncodedInputs client_encode_seeded(std::span<const uint8_t> bits, const gc::GarbleSeed& seed) {
  const gc::LabelDeriver d(seed);
  EncodedInputs e;
  e.labels = gc::encode_inputs(d, bits);
  e.report.client_rx_bits = 2 * kKappa;
  e.report.server_tx_bits = 2 * kKappa;
  e.report.client_tx_bits = kKappa * bits.size();
  e.report.rounds = 1;
  return e;
}

std::vector<std::array<gc::Block, 2>> label_pairs(const gc::LabelDeriver& d, uint32_t first, uint32_t count) {
  std::vector<std::array<gc::Block, 2>> out(count);
  for (uint32_t i = 0; i < count; ++i) {
    const gc::Block z = d.input_zero(first + i);
    out[i] = {z, z ^ d.delta()};
  }
  return out;
}

uint64_t garbled_message_bytes(uint64_t and_gates) {
  const uint64_t table = 32 * and_gates;
  const uint64_t chunks = (table + gc::kTableChunkBytes - 1) / gc::kTableChunkBytes;
  // Each garbled frame travels inside its own GC_STREAM message.
  return gc::garbled_stream_bytes(and_gates) + (1 + chunks) * kMsgHeaderBytes;
}

PrivacyBound privacy_bound(uint64_t o, uint64_t c) {
  if (c < 2) throw ProtocolError("privacy bound needs c >= 2");
  PrivacyBound p;
  p.o = o;
  p.c = c;
  if (o <= c) {
    p.insufficient_stream = true;
    return p;
  }
  p.bound = 1.0 / (static_cast<double>(o) - static_cast<double>(o) / static_cast<double>(c));
  return p;
}

std::string PrivacyBound::describe() const {
  if (insufficient_stream)
    return "insufficient stream: " + std::to_string(o) + " invocations with c = " + std::to_string(c);
  char buf[128];
  std::snprintf(buf, sizeof buf, "bound %.6g (1/%.6g) over %llu invocations, c = %llu", bound, 1.0 / bound,
                static_cast<unsigned long long>(o), static_cast<unsigned long long>(c));
  return buf;
}

}  // namespace snail::protocol
