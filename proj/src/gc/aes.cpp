#include "gc/aes.hpp"

#include <cpuid.h>
#include <immintrin.h>

namespace snail::gc {

namespace {

inline __m128i load(const Block& b) { return _mm_set_epi64x(static_cast<long long>(b.hi), static_cast<long long>(b.lo)); }
inline Block store(__m128i v) {
  Block b;
  b.lo = static_cast<uint64_t>(_mm_cvtsi128_si64(v));
  b.hi = static_cast<uint64_t>(_mm_extract_epi64(v, 1));
  return b;
}

template <int Rcon>
__m128i expand_step(__m128i key) {
  __m128i t = _mm_aeskeygenassist_si128(key, Rcon);
  t = _mm_shuffle_epi32(t, 0xFF);
  key = _mm_xor_si128(key, _mm_slli_si128(key, 4));
  key = _mm_xor_si128(key, _mm_slli_si128(key, 4));
  key = _mm_xor_si128(key, _mm_slli_si128(key, 4));
  return _mm_xor_si128(key, t);
}

void expand_key(const Block& key, uint8_t* rk) {
  __m128i k[11];
  k[0] = load(key);
  k[1] = expand_step<0x01>(k[0]);
  k[2] = expand_step<0x02>(k[1]);
  k[3] = expand_step<0x04>(k[2]);
  k[4] = expand_step<0x08>(k[3]);
  k[5] = expand_step<0x10>(k[4]);
  k[6] = expand_step<0x20>(k[5]);
  k[7] = expand_step<0x40>(k[6]);
  k[8] = expand_step<0x80>(k[7]);
  k[9] = expand_step<0x1B>(k[8]);
  k[10] = expand_step<0x36>(k[9]);
  for (int i = 0; i < 11; ++i) _mm_store_si128(reinterpret_cast<__m128i*>(rk + 16 * i), k[i]);
}

template <int N>
inline void encrypt_blocks(const uint8_t* rk, __m128i* v) {
  const __m128i* k = reinterpret_cast<const __m128i*>(rk);
  for (int j = 0; j < N; ++j) v[j] = _mm_xor_si128(v[j], k[0]);
  for (int r = 1; r < 10; ++r)
    for (int j = 0; j < N; ++j) v[j] = _mm_aesenc_si128(v[j], k[r]);
  for (int j = 0; j < N; ++j) v[j] = _mm_aesenclast_si128(v[j], k[10]);
}

// Arbitrary public key for the fixed permutation.
const Aes128& fixed_aes() {
  static const Aes128 aes(Block{0x243F6A8885A308D3ull, 0x13198A2E03707344ull});
  return aes;
}

inline __m128i sigma(__m128i x) {
  // (hi ⊕ lo) ‖ hi, with lo in the low lane: (hi, hi) ⊕ (lo, 0).
  return _mm_xor_si128(_mm_unpackhi_epi64(x, x), _mm_move_epi64(x));
}

inline __m128i tweak(uint64_t t) { return _mm_set1_epi64x(static_cast<long long>(t)); }

}  // namespace

Aes128::Aes128(const Block& key) { expand_key(key, rk_); }

Block Aes128::encrypt(const Block& in) const {
  __m128i v = load(in);
  encrypt_blocks<1>(rk_, &v);
  return store(v);
}

void Aes128::encrypt_n(const Block* in, Block* out, size_t n) const {
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m128i v[4] = {load(in[i]), load(in[i + 1]), load(in[i + 2]), load(in[i + 3])};
    encrypt_blocks<4>(rk_, v);
    for (int j = 0; j < 4; ++j) out[i + j] = store(v[j]);
  }
  for (; i < n; ++i) out[i] = encrypt(in[i]);
}

Block tweak_hash(const Block& x, uint64_t t) {
  __m128i v = _mm_xor_si128(sigma(load(x)), tweak(t));
  __m128i e = v;
  encrypt_blocks<1>(fixed_aes().round_keys(), &e);
  return store(_mm_xor_si128(e, v));
}

void tweak_hash2(const Block& x0, uint64_t t0, const Block& x1, uint64_t t1, Block& out0, Block& out1) {
  const __m128i v0 = _mm_xor_si128(sigma(load(x0)), tweak(t0));
  const __m128i v1 = _mm_xor_si128(sigma(load(x1)), tweak(t1));
  __m128i e[2] = {v0, v1};
  encrypt_blocks<2>(fixed_aes().round_keys(), e);
  out0 = store(_mm_xor_si128(e[0], v0));
  out1 = store(_mm_xor_si128(e[1], v1));
}

void tweak_hash4(const Block* x, const uint64_t* t, Block* out) {
  __m128i v[4], e[4];
  for (int j = 0; j < 4; ++j) e[j] = v[j] = _mm_xor_si128(sigma(load(x[j])), tweak(t[j]));
  encrypt_blocks<4>(fixed_aes().round_keys(), e);
  for (int j = 0; j < 4; ++j) out[j] = store(_mm_xor_si128(e[j], v[j]));
}

bool aes_ni_available() {
  unsigned a, b, c, d;
  if (!__get_cpuid(1, &a, &b, &c, &d)) return false;
  return (c & bit_AES) != 0;
}

}  // namespace snail::gc
