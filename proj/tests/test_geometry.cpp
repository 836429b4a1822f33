#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "catch_amalgamated.hpp"
#include "geometry/camera.hpp"

using namespace snail::geometry;
using Catch::Approx;

namespace {

// Independent reference: R = Rz·Ry·Rx from Eigen's angle-axis rotations.
Eigen::Matrix3d eigen_rotation(const Pose& p) {
  return (Eigen::AngleAxisd(p.rz, Eigen::Vector3d::UnitZ()) * Eigen::AngleAxisd(p.ry, Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(p.rx, Eigen::Vector3d::UnitX()))
      .toRotationMatrix();
}

Eigen::Vector2d eigen_project(const Pose& p, const Intrinsics& k, const Vec3T<double>& m) {
  const Eigen::Vector3d c = eigen_rotation(p) * Eigen::Vector3d(m.x, m.y, m.z) + Eigen::Vector3d(p.tx, p.ty, p.tz);
  return {k.fx * c.x() / c.z() + k.cx, k.fy * c.y() / c.z() + k.cy};
}

}  // namespace

TEST_CASE("sin_cos polynomial tracks libm over the pose range") {
  for (double x = -3.2; x <= 3.2; x += 1e-3) {
    const auto [s, c] = sin_cos(x);
    REQUIRE(s == Approx(std::sin(x)).margin(1e-12));
    REQUIRE(c == Approx(std::cos(x)).margin(1e-12));
  }
}

TEST_CASE("rotation matrix matches Rz Ry Rx") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int t = 0; t < 200; ++t) {
    const Pose p{u(rng), u(rng), u(rng), 0, 0, 0};
    const auto r = rotation_matrix(p);
    const Eigen::Matrix3d e = eigen_rotation(p);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) REQUIRE(r[i][j] == Approx(e(i, j)).margin(1e-11));
  }
}

TEST_CASE("projection and residual layout") {
  const Intrinsics k;
  SECTION("identity pose puts the optical axis at the principal point") {
    const auto q = project(Pose{}, k, Vec3T<double>{0, 0, 4});
    REQUIRE(q.x == 320);
    REQUIRE(q.y == 240);
  }
  SECTION("random poses agree with the Eigen projection") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> a(-0.4, 0.4), t(-1, 1), m(-2, 2);
    for (int i = 0; i < 200; ++i) {
      const Pose p{a(rng), a(rng), a(rng), t(rng), t(rng), 6 + t(rng)};
      const Vec3T<double> pt{m(rng), m(rng), m(rng)};
      const auto q = project(p, k, pt);
      const auto e = eigen_project(p, k, pt);
      REQUIRE(q.x == Approx(e.x()).epsilon(1e-12));
      REQUIRE(q.y == Approx(e.y()).epsilon(1e-12));
    }
  }
  SECTION("residuals interleave x and y, projected minus measured") {
    CorrespondenceSet c;
    c.map = {{0, 0, 4}, {1, 0, 5}};
    c.image = {{300, 250}, {400, 240}};
    const auto r = residuals(Pose{}, k, c);
    REQUIRE(r.size() == 4);
    REQUIRE(r[0] == Approx(20));
    REQUIRE(r[1] == Approx(-10));
    REQUIRE(r[2] == Approx(20));
    REQUIRE(r[3] == Approx(0));
    REQUIRE(squared_error(r) == Approx(900));
  }
  SECTION("points behind the camera are rejected") {
    REQUIRE_THROWS_AS(project(Pose{}, k, Vec3T<double>{0, 0, -1}), GeometryError);
  }
}

TEST_CASE("forward-difference Jacobian approximates central differences") {
  const Intrinsics k;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> a(-0.3, 0.3), m(-1.5, 1.5);
  const Pose p{a(rng), a(rng), a(rng), a(rng), a(rng), 5};
  CorrespondenceSet c;
  for (int i = 0; i < 6; ++i) {
    c.map.push_back({m(rng), m(rng), m(rng)});
    c.image.push_back({300, 200});
  }
  const auto j = numeric_jacobian(p, k, c, 1e-6);
  REQUIRE(j.rows() == 12);
  REQUIRE(j.cols() == 6);
  for (int d = 0; d < 6; ++d) {
    Pose hi = p, lo = p;
    hi[d] += 1e-5;
    lo[d] -= 1e-5;
    for (size_t i = 0; i < c.size(); ++i) {
      const Eigen::Vector2d dp = (eigen_project(hi, k, c.map[i]) - eigen_project(lo, k, c.map[i])) / 2e-5;
      REQUIRE(j(2 * i, d) == Approx(dp.x()).margin(1e-3 * (1 + std::abs(dp.x()))));
      REQUIRE(j(2 * i + 1, d) == Approx(dp.y()).margin(1e-3 * (1 + std::abs(dp.y()))));
    }
  }
  REQUIRE_THROWS_AS(numeric_jacobian(p, k, c, 0.0), GeometryError);
}

TEST_CASE("validation") {
  Pose bad;
  bad.ty = std::nan("");
  REQUIRE_THROWS_AS(validate(bad), GeometryError);
  REQUIRE_THROWS_AS(validate(Intrinsics{0, 500, 320, 240}), GeometryError);
  CorrespondenceSet c;
  c.map = {{0, 0, 1}};
  REQUIRE_THROWS_AS(validate(c), GeometryError);
  c.image = {{0, 0}};
  REQUIRE_THROWS_AS(validate(c, 3), GeometryError);
  REQUIRE_NOTHROW(validate(c, 1));
}
