#include "gc/ot.hpp"

#include <sodium.h>

#include <cstring>

namespace snail::gc {

namespace {

void ensure_sodium() {
  static const int ok = sodium_init();
  if (ok < 0) throw OtError("libsodium initialization failed");
}

using Point = std::array<uint8_t, 32>;

Point mul(const uint8_t* scalar, const uint8_t* point) {
  Point out;
  if (crypto_scalarmult_ristretto255(out.data(), scalar, point) != 0) throw OtError("degenerate OT point");
  return out;
}

Point mul_base(const uint8_t* scalar) {
  Point out;
  if (crypto_scalarmult_ristretto255_base(out.data(), scalar) != 0) throw OtError("degenerate OT scalar");
  return out;
}

void check_point(const uint8_t* p) {
  if (!crypto_core_ristretto255_is_valid_point(p)) throw OtError("invalid group element in OT message");
}

// Key = BLAKE2b(A ‖ B ‖ shared point ‖ index) truncated to 16 bytes.
Block key(const uint8_t* A, const uint8_t* B, const Point& shared, uint32_t index) {
  crypto_generichash_state st;
  crypto_generichash_init(&st, nullptr, 0, 16);
  crypto_generichash_update(&st, A, 32);
  crypto_generichash_update(&st, B, 32);
  crypto_generichash_update(&st, shared.data(), 32);
  uint8_t idx[4];
  for (int i = 0; i < 4; ++i) idx[i] = static_cast<uint8_t>(index >> (8 * i));
  crypto_generichash_update(&st, idx, 4);
  uint8_t out[16];
  crypto_generichash_final(&st, out, 16);
  return Block::from_bytes(out);
}

}  // namespace

OtSender::OtSender() {
  ensure_sodium();
  crypto_core_ristretto255_scalar_random(a_.data());
  A_ = mul_base(a_.data());
}

std::vector<uint8_t> OtSender::setup() const { return {A_.begin(), A_.end()}; }

std::vector<uint8_t> OtSender::respond(std::span<const uint8_t> receiver_msg,
                                       std::span<const std::array<Block, 2>> pairs) const {
  if (receiver_msg.size() != 32 * pairs.size()) throw OtError("OT receiver message has the wrong length");
  std::vector<uint8_t> out(32 * pairs.size());
  for (uint32_t i = 0; i < pairs.size(); ++i) {
    const uint8_t* B = receiver_msg.data() + 32 * i;
    check_point(B);
    Point diff;
    crypto_core_ristretto255_sub(diff.data(), B, A_.data());
    const Block k0 = key(A_.data(), B, mul(a_.data(), B), i);
    const Block k1 = key(A_.data(), B, mul(a_.data(), diff.data()), i);
    (pairs[i][0] ^ k0).to_bytes(out.data() + 32 * i);
    (pairs[i][1] ^ k1).to_bytes(out.data() + 32 * i + 16);
  }
  return out;
}

OtReceiver::OtReceiver(std::span<const uint8_t> choices) : choices_(choices.begin(), choices.end()) { ensure_sodium(); }

std::vector<uint8_t> OtReceiver::choose(std::span<const uint8_t> sender_setup) {
  if (sender_setup.size() != 32) throw OtError("OT sender setup has the wrong length");
  std::memcpy(A_.data(), sender_setup.data(), 32);
  check_point(A_.data());
  b_.assign(choices_.size(), {});
  B_.assign(32 * choices_.size(), 0);
  for (size_t i = 0; i < choices_.size(); ++i) {
    crypto_core_ristretto255_scalar_random(b_[i].data());
    Point B = mul_base(b_[i].data());
    if (choices_[i] & 1) crypto_core_ristretto255_add(B.data(), B.data(), A_.data());
    std::memcpy(B_.data() + 32 * i, B.data(), 32);
  }
  return B_;
}

std::vector<Block> OtReceiver::finish(std::span<const uint8_t> sender_response) const {
  if (sender_response.size() != 32 * choices_.size()) throw OtError("OT sender response has the wrong length");
  std::vector<Block> out(choices_.size());
  for (uint32_t i = 0; i < choices_.size(); ++i) {
    const uint8_t* B = B_.data() + 32 * i;
    const Block k = key(A_.data(), B, mul(b_[i].data(), A_.data()), i);
    const int c = choices_[i] & 1;
    out[i] = Block::from_bytes(sender_response.data() + 32 * i + 16 * c) ^ k;
  }
  return out;
}

}  // namespace snail::gc
