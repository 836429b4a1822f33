#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "obliv/format.hpp"

namespace snail::obliv {

enum class OpKind : uint8_t {
  kInput = 0,
  kConst = 1,
  kConstBit = 2,
  kAdd = 3,
  kSub = 4,
  kMul = 5,
  kDiv = 6,
  kSqrt = 7,
  kNeg = 8,
  kAbs = 9,
  kCmpLt = 10,
  kSelect = 11,
};
constexpr int kNumOpKinds = 12;
const char* op_name(OpKind k);
int op_arity(OpKind k);

// Each op produces exactly one slot, whose id is the op's index.
struct TapeOp {
  OpKind kind;
  uint32_t a = 0, b = 0, c = 0;
  uint64_t imm = 0;  // constant raw word for kConst / kConstBit
};

struct ObliviousTape {
  NumericFormat format;
  std::vector<TapeOp> ops;
  std::vector<uint8_t> is_bit;  // per slot: 1 for boolean-valued slots
  std::vector<uint32_t> inputs;
  std::vector<uint32_t> outputs;

  size_t size() const { return ops.size(); }
};

class TapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<uint8_t> serialize(const ObliviousTape& t);
ObliviousTape deserialize(std::span<const uint8_t> bytes);
// BLAKE2b-256 over the serialized form: op kinds, wiring and public constants.
std::array<uint8_t, 32> structure_digest(const ObliviousTape& t);
std::string digest_hex(const std::array<uint8_t, 32>& d);

class TapeBuilder;

class SecretBit {
 public:
  SecretBit() = default;
  SecretBit(TapeBuilder* b, uint32_t id) : b_(b), id_(id) {}
  uint32_t id() const { return id_; }
  TapeBuilder* builder() const { return b_; }

 private:
  TapeBuilder* b_ = nullptr;
  uint32_t id_ = UINT32_MAX;
};

// A scalar living in a tape slot. Arithmetic on it records ops on the
// builder it belongs to instead of computing anything.
class Secret {
 public:
  Secret() = default;
  // Public constant on the builder installed by the innermost BuildScope.
  explicit Secret(double v);
  Secret(TapeBuilder* b, uint32_t id) : b_(b), id_(id) {}
  uint32_t id() const { return id_; }
  TapeBuilder* builder() const { return b_; }
  bool valid() const { return b_ != nullptr; }

  Secret operator-() const;
  Secret& operator+=(const Secret& o);
  Secret& operator-=(const Secret& o);
  Secret& operator*=(const Secret& o);
  Secret& operator/=(const Secret& o);

 private:
  TapeBuilder* b_ = nullptr;
  uint32_t id_ = UINT32_MAX;
};

Secret operator+(const Secret& a, const Secret& b);
Secret operator-(const Secret& a, const Secret& b);
Secret operator*(const Secret& a, const Secret& b);
Secret operator/(const Secret& a, const Secret& b);
Secret sqrt(const Secret& a);
Secret abs(const Secret& a);
SecretBit less(const Secret& a, const Secret& b);
Secret select(const SecretBit& c, const Secret& a, const Secret& b);
SecretBit select(const SecretBit& c, const SecretBit& a, const SecretBit& b);
SecretBit land(const SecretBit& a, const SecretBit& b);
SecretBit lor(const SecretBit& a, const SecretBit& b);
SecretBit lnot(const SecretBit& a);

class TapeBuilder {
 public:
  explicit TapeBuilder(NumericFormat fmt);

  NumericFormat format() const { return tape_.format; }
  Secret input();
  // Input slot whose value is remembered for a later cleartext run.
  Secret lift(double v);
  Secret constant(double v);
  SecretBit constant_bit(bool v);
  void output(const Secret& s);
  void output(const SecretBit& s);

  uint32_t emit(OpKind k, uint32_t a = 0, uint32_t b = 0, uint32_t c = 0, uint64_t imm = 0);
  bool slot_is_bit(uint32_t id) const { return tape_.is_bit[id] != 0; }
  size_t size() const { return tape_.ops.size(); }

  // Encoded values of lifted inputs, in input order.
  const std::vector<uint64_t>& witness() const { return witness_; }
  ObliviousTape finish();

 private:
  ObliviousTape tape_;
  std::vector<uint64_t> witness_;
  std::unordered_map<uint64_t, uint32_t> consts_;
  uint32_t bit_consts_[2] = {UINT32_MAX, UINT32_MAX};
};

// Installs a builder as the target of Secret(double) for the current thread.
class BuildScope {
 public:
  explicit BuildScope(TapeBuilder& b);
  ~BuildScope();
  BuildScope(const BuildScope&) = delete;
  BuildScope& operator=(const BuildScope&) = delete;

 private:
  TapeBuilder* prev_;
};
TapeBuilder& current_builder();

inline ScalarLimits scalar_limits_of(const Secret& s) { return limits_for(s.builder()->format()); }

}  // namespace snail::obliv
