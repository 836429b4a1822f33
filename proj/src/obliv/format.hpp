#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace snail::obliv {

enum class FormatKind : uint8_t { kFloat32 = 0, kFixed64 = 1 };

struct NumericFormat {
  FormatKind kind = FormatKind::kFloat32;
  int frac_bits = 0;  // Fixed64 only

  static NumericFormat float32() { return {FormatKind::kFloat32, 0}; }
  static NumericFormat fixed64(int frac_bits = 24);

  int width() const { return kind == FormatKind::kFloat32 ? 32 : 64; }
  bool is_fixed() const { return kind == FormatKind::kFixed64; }
  std::string name() const;
  static NumericFormat parse(const std::string& s);

  friend bool operator==(const NumericFormat&, const NumericFormat&) = default;
};

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Encodes a plaintext value as the raw slot word of the format. Float32 keeps
// the bit pattern in the low 32 bits; Fixed64 is two's complement.
uint64_t encode(double v, NumericFormat fmt);
double decode(uint64_t raw, NumericFormat fmt);

// Magnitude limits that the rotation and reflector kernels scale against.
struct ScalarLimits {
  double safmin;  // smallest safe positive value
  double safmax;  // largest safe value (1/safmin for floats)
  double rtmin;
  double rtmax;
  double tiny;  // inputs at or below this are treated as zero by rotations
};
ScalarLimits limits_for(NumericFormat fmt);

// Cleartext semantics shared by the tape interpreter and the circuit tests.
namespace f32 {
uint32_t add(uint32_t a, uint32_t b);
uint32_t sub(uint32_t a, uint32_t b);
uint32_t mul(uint32_t a, uint32_t b);
uint32_t div(uint32_t a, uint32_t b);
uint32_t sqrt(uint32_t a);
inline uint32_t neg(uint32_t a) { return a ^ 0x80000000u; }
inline uint32_t abs(uint32_t a) { return a & 0x7FFFFFFFu; }
bool less(uint32_t a, uint32_t b);
constexpr uint32_t kCanonicalNan = 0x7FC00000u;
}  // namespace f32

namespace fx {
struct Result {
  int64_t v;
  bool overflow;
};
Result add(int64_t a, int64_t b);
Result sub(int64_t a, int64_t b);
Result mul(int64_t a, int64_t b, int frac);
Result div(int64_t a, int64_t b, int frac);
Result sqrt(int64_t a, int frac);
Result neg(int64_t a);
Result abs(int64_t a);
inline bool less(int64_t a, int64_t b) { return a < b; }
}  // namespace fx

}  // namespace snail::obliv
