#pragma once

#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <type_traits>
#include <utility>
#include <vector>

#include "common/matrix.hpp"
#include "obliv/scalar.hpp"

namespace snail::geometry {

// Euler angles (radians) and translation; R = Rz(rz) * Ry(ry) * Rx(rx).
template <class T>
struct PoseT {
  T rx{}, ry{}, rz{}, tx{}, ty{}, tz{};

  T& operator[](int i) { return *members()[i]; }
  const T& operator[](int i) const { return *const_cast<PoseT*>(this)->members()[i]; }

 private:
  std::array<T*, 6> members() { return {&rx, &ry, &rz, &tx, &ty, &tz}; }
};
using Pose = PoseT<double>;

struct Intrinsics {
  double fx = 500, fy = 500, cx = 320, cy = 240;
};

template <class T>
struct Vec2T {
  T x{}, y{};
  friend bool operator==(const Vec2T&, const Vec2T&) = default;
};
template <class T>
struct Vec3T {
  T x{}, y{}, z{};
  friend bool operator==(const Vec3T&, const Vec3T&) = default;
};
template <class T>
using Mat3T = std::array<std::array<T, 3>, 3>;

template <class T>
struct CorrespondencesT {
  std::vector<Vec2T<T>> image;
  std::vector<Vec3T<T>> map;
  size_t size() const { return image.size(); }
};
using CorrespondenceSet = CorrespondencesT<double>;

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void validate(const Pose& p);
void validate(const Intrinsics& k);
void validate(const CorrespondenceSet& c, size_t min_points = 3);

// Deterministic sine/cosine built from + and * only, so plaintext and tape
// evaluations agree bit for bit: Taylor series on x/4, then two doublings.
template <class T>
std::pair<T, T> sin_cos(const T& x) {
  const T y = T(0.25) * x;
  const T y2 = y * y;
  T s = T(1.0 / 6227020800.0);
  s = T(-1.0 / 39916800.0) + y2 * s;
  s = T(1.0 / 362880.0) + y2 * s;
  s = T(-1.0 / 5040.0) + y2 * s;
  s = T(1.0 / 120.0) + y2 * s;
  s = T(-1.0 / 6.0) + y2 * s;
  s = T(1.0) + y2 * s;
  s = y * s;
  T c = T(-1.0 / 87178291200.0);
  c = T(1.0 / 479001600.0) + y2 * c;
  c = T(-1.0 / 3628800.0) + y2 * c;
  c = T(1.0 / 40320.0) + y2 * c;
  c = T(-1.0 / 720.0) + y2 * c;
  c = T(1.0 / 24.0) + y2 * c;
  c = T(-0.5) + y2 * c;
  c = T(1.0) + y2 * c;
  for (int i = 0; i < 2; ++i) {
    const T s2 = T(2.0) * s * c;
    c = T(1.0) - T(2.0) * s * s;
    s = s2;
  }
  return {s, c};
}

template <class T>
Mat3T<T> rotation_matrix(const PoseT<T>& p) {
  const auto [sx, cx] = sin_cos(p.rx);
  const auto [sy, cy] = sin_cos(p.ry);
  const auto [sz, cz] = sin_cos(p.rz);
  Mat3T<T> r;
  r[0][0] = cz * cy;
  r[0][1] = cz * sy * sx - sz * cx;
  r[0][2] = cz * sy * cx + sz * sx;
  r[1][0] = sz * cy;
  r[1][1] = sz * sy * sx + cz * cx;
  r[1][2] = sz * sy * cx - cz * sx;
  r[2][0] = -sy;
  r[2][1] = cy * sx;
  r[2][2] = cy * cx;
  return r;
}

template <class T>
Vec2T<T> project_with(const Mat3T<T>& r, const PoseT<T>& p, const Intrinsics& k, const Vec3T<T>& m) {
  const T xc = r[0][0] * m.x + r[0][1] * m.y + r[0][2] * m.z + p.tx;
  const T yc = r[1][0] * m.x + r[1][1] * m.y + r[1][2] * m.z + p.ty;
  const T zc = r[2][0] * m.x + r[2][1] * m.y + r[2][2] * m.z + p.tz;
  if constexpr (std::is_floating_point_v<T>) {
    if (!(zc > 0)) throw GeometryError("point behind camera");
  }
  return {T(k.fx) * (xc / zc) + T(k.cx), T(k.fy) * (yc / zc) + T(k.cy)};
}

template <class T>
Vec2T<T> project(const PoseT<T>& p, const Intrinsics& k, const Vec3T<T>& m) {
  return project_with(rotation_matrix(p), p, k, m);
}

// Interleaved (dx0, dy0, dx1, dy1, ...) of projected minus measured.
template <class T>
std::vector<T> residuals(const PoseT<T>& p, const Intrinsics& k, const CorrespondencesT<T>& c) {
  const Mat3T<T> r = rotation_matrix(p);
  std::vector<T> out;
  out.reserve(2 * c.size());
  for (size_t i = 0; i < c.size(); ++i) {
    const Vec2T<T> q = project_with(r, p, k, c.map[i]);
    out.push_back(q.x - c.image[i].x);
    out.push_back(q.y - c.image[i].y);
  }
  return out;
}

template <class T>
T squared_error(const std::vector<T>& r) {
  T s = T(0.0);
  for (const T& v : r) s = s + v * v;
  return s;
}

// Forward differences against residuals already computed at p.
template <class T>
Matrix<T> numeric_jacobian(const PoseT<T>& p, const Intrinsics& k, const CorrespondencesT<T>& c, double eps,
                           const std::vector<T>& base) {
  Matrix<T> j(2 * c.size(), 6);
  const T step = T(eps);
  for (int d = 0; d < 6; ++d) {
    PoseT<T> q = p;
    q[d] = q[d] + step;
    const std::vector<T> r = residuals(q, k, c);
    for (size_t i = 0; i < r.size(); ++i) j(i, d) = (r[i] - base[i]) / step;
  }
  return j;
}

template <class T>
Matrix<T> numeric_jacobian(const PoseT<T>& p, const Intrinsics& k, const CorrespondencesT<T>& c, double eps) {
  if (!(eps > 0)) throw GeometryError("epsilon must be positive");
  return numeric_jacobian(p, k, c, eps, residuals(p, k, c));
}

template <class T, class U>
PoseT<T> pose_cast(const PoseT<U>& p) {
  PoseT<T> q;
  for (int i = 0; i < 6; ++i) q[i] = static_cast<T>(p[i]);
  return q;
}

template <class T>
CorrespondencesT<T> correspondences_cast(const CorrespondenceSet& c) {
  CorrespondencesT<T> o;
  for (const auto& v : c.image) o.image.push_back({static_cast<T>(v.x), static_cast<T>(v.y)});
  for (const auto& v : c.map) o.map.push_back({static_cast<T>(v.x), static_cast<T>(v.y), static_cast<T>(v.z)});
  return o;
}

}  // namespace snail::geometry
