#include "harness/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace snail::harness {

std::mt19937_64 seeded_rng(uint64_t seed, uint64_t stream) {
  std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32), static_cast<uint32_t>(stream),
                    static_cast<uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

SyntheticScene gen_scene(size_t n, double noise_sigma, uint64_t rng_seed) {
  if (n < 6) throw geometry::GeometryError("gen_scene needs n >= 6");
  if (!(noise_sigma >= 0)) throw geometry::GeometryError("noise sigma must be >= 0");
  auto rng = seeded_rng(rng_seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> px_u(0.0, kImageWidth), px_v(0.0, kImageHeight);
  std::uniform_real_distribution<double> depth(kMinDepth, kMaxDepth);
  std::normal_distribution<double> noise(0.0, 1.0);

  SyntheticScene s;
  s.rng_seed = rng_seed;
  s.pixel_noise_sigma = noise_sigma;
  s.intrinsics = {500, 500, kImageWidth / 2.0, kImageHeight / 2.0};
  for (int d = 0; d < 3; ++d) s.ground_truth[d] = 0.3 * unit(rng);
  for (int d = 3; d < 6; ++d) s.ground_truth[d] = unit(rng);

  const auto& k = s.intrinsics;
  const auto r = geometry::rotation_matrix(s.ground_truth);
  for (size_t i = 0; i < n; ++i) {
    const double u = px_u(rng), v = px_v(rng), z = depth(rng);
    // Camera frame point, then back to the map frame: m = Rᵀ(p − t).
    const double p[3] = {(u - k.cx) / k.fx * z - s.ground_truth.tx, (v - k.cy) / k.fy * z - s.ground_truth.ty,
                         z - s.ground_truth.tz};
    geometry::Vec3T<double> m{r[0][0] * p[0] + r[1][0] * p[1] + r[2][0] * p[2],
                              r[0][1] * p[0] + r[1][1] * p[1] + r[2][1] * p[2],
                              r[0][2] * p[0] + r[1][2] * p[1] + r[2][2] * p[2]};
    auto q = geometry::project(s.ground_truth, k, m);
    q.x += noise_sigma * noise(rng);
    q.y += noise_sigma * noise(rng);
    s.correspondences.map.push_back(m);
    s.correspondences.image.push_back(q);
  }
  return s;
}

Pose perturbed_start(const SyntheticScene& s, double rot, double trans) {
  auto rng = seeded_rng(s.rng_seed, 1);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Pose x = s.ground_truth;
  for (int d = 0; d < 3; ++d) x[d] += rot * unit(rng);
  for (int d = 3; d < 6; ++d) x[d] += trans * unit(rng);
  return x;
}

namespace {

// Trigonometric rotation matrix in double for error metrics.
std::array<std::array<double, 3>, 3> rot(const Pose& p) {
  const double sx = std::sin(p.rx), cx = std::cos(p.rx), sy = std::sin(p.ry), cy = std::cos(p.ry);
  const double sz = std::sin(p.rz), cz = std::cos(p.rz);
  return {{{cz * cy, cz * sy * sx - sz * cx, cz * sy * cx + sz * sx},
           {sz * cy, sz * sy * sx + cz * cx, sz * sy * cx - cz * sx},
           {-sy, cy * sx, cy * cx}}};
}

}  // namespace

PoseError pose_error(const Pose& estimate, const Pose& truth) {
  PoseError e;
  const double dt[3] = {estimate.tx - truth.tx, estimate.ty - truth.ty, estimate.tz - truth.tz};
  e.translation = std::sqrt(dt[0] * dt[0] + dt[1] * dt[1] + dt[2] * dt[2]);
  const auto a = rot(estimate), b = rot(truth);
  // trace(Aᵀ B) = 1 + 2 cos θ
  double tr = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) tr += a[i][j] * b[i][j];
  e.rotation = std::acos(std::clamp((tr - 1) / 2, -1.0, 1.0));
  return e;
}

nlohmann::json scene_to_json(const SyntheticScene& s) {
  nlohmann::json corr = nlohmann::json::array();
  for (size_t i = 0; i < s.correspondences.size(); ++i) {
    const auto& m = s.correspondences.map[i];
    const auto& q = s.correspondences.image[i];
    corr.push_back({{"image", {q.x, q.y}}, {"map", {m.x, m.y, m.z}}});
  }
  const auto& g = s.ground_truth;
  const auto& k = s.intrinsics;
  return {{"intrinsics", {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy}}},
          {"ground_truth", {g.rx, g.ry, g.rz, g.tx, g.ty, g.tz}},
          {"correspondences", corr},
          {"pixel_noise_sigma", s.pixel_noise_sigma},
          {"rng_seed", s.rng_seed}};
}

SyntheticScene scene_from_json(const nlohmann::json& j) {
  SyntheticScene s;
  try {
    if (j.contains("intrinsics")) {
      const auto& k = j.at("intrinsics");
      s.intrinsics = {k.at("fx").get<double>(), k.at("fy").get<double>(), k.at("cx").get<double>(),
                      k.at("cy").get<double>()};
    }
    if (j.contains("ground_truth")) {
      const auto& g = j.at("ground_truth");
      if (g.size() != 6) throw geometry::GeometryError("ground_truth needs 6 numbers");
      for (int d = 0; d < 6; ++d) s.ground_truth[d] = g.at(d).get<double>();
    }
    for (const auto& c : j.at("correspondences")) {
      const auto& q = c.at("image");
      const auto& m = c.at("map");
      s.correspondences.image.push_back({q.at(0).get<double>(), q.at(1).get<double>()});
      s.correspondences.map.push_back({m.at(0).get<double>(), m.at(1).get<double>(), m.at(2).get<double>()});
    }
    s.pixel_noise_sigma = j.value("pixel_noise_sigma", 0.0);
    s.rng_seed = j.value("rng_seed", uint64_t{0});
  } catch (const nlohmann::json::exception& e) {
    throw geometry::GeometryError(std::string("bad scene JSON: ") + e.what());
  }
  geometry::validate(s.intrinsics);
  geometry::validate(s.correspondences);
  return s;
}

CorrespondenceSet load_matches_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw geometry::GeometryError("cannot open " + path);
  CorrespondenceSet c;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (lineno == 1 && line.find_first_of("uU") == 0) continue;  // header
    std::stringstream ss(line);
    double v[5];
    char comma;
    for (int i = 0; i < 5; ++i) {
      if (!(ss >> v[i])) throw geometry::GeometryError(path + ":" + std::to_string(lineno) + ": expected 5 numbers");
      if (i < 4) ss >> comma;
    }
    c.image.push_back({v[0], v[1]});
    c.map.push_back({v[2], v[3], v[4]});
  }
  geometry::validate(c);
  return c;
}

}  // namespace snail::harness
