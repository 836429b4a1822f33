#pragma once

// Plaintext overloads of the oblivious primitives, so every kernel can be
// written once and instantiated for float, double or Secret.

#include <cmath>
#include <concepts>
#include <limits>
#include <utility>

#include "obliv/format.hpp"
#include "obliv/tape.hpp"

namespace snail {

// Same total order as the tape comparison: NaN above everything, -0 == +0.
template <std::floating_point F>
inline bool less(F a, F b) {
  if (std::isnan(a)) return false;
  if (std::isnan(b)) return true;
  return a < b;
}

template <std::floating_point F>
inline F select(bool c, F a, F b) {
  return c ? a : b;
}
inline bool select(bool c, bool a, bool b) { return c ? a : b; }
inline bool land(bool a, bool b) { return a && b; }
inline bool lor(bool a, bool b) { return a || b; }
inline bool lnot(bool a) { return !a; }

using obliv::land;
using obliv::less;
using obliv::lnot;
using obliv::lor;
using obliv::select;

template <class T>
using bit_t = decltype(less(std::declval<T>(), std::declval<T>()));

template <class T>
obliv::ScalarLimits scalar_limits() {
  if constexpr (std::is_same_v<T, float>) {
    return obliv::limits_for(obliv::NumericFormat::float32());
  } else if constexpr (std::is_same_v<T, double>) {
    const double safmin = std::numeric_limits<double>::min();
    return {safmin, 1.0 / safmin, std::sqrt(safmin), std::sqrt(1.0 / safmin / 2), 1e-300};
  } else {
    return obliv::limits_for(obliv::current_builder().format());
  }
}

template <class T>
inline T tmin(const T& a, const T& b) {
  return select(less(b, a), b, a);
}
template <class T>
inline T tmax(const T& a, const T& b) {
  return select(less(a, b), b, a);
}
// |a| carrying the sign of b, with b = -0 treated as positive.
template <class T>
inline T copy_sign(const T& a, const T& b) {
  using std::abs;
  const T m = abs(a);
  return select(less(b, T(0.0)), -m, m);
}
// Replaces a zero (or negative) denominator by one; used where the result is
// discarded by a later select but the division must still be well defined.
template <class T>
inline T guard_positive(const T& d) {
  return select(less(T(0.0), d), d, T(1.0));
}

}  // namespace snail
