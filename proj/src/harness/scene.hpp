#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "geometry/camera.hpp"
#include "json.hpp"

namespace snail::harness {

using geometry::CorrespondenceSet;
using geometry::Intrinsics;
using geometry::Pose;

constexpr int kImageWidth = 640;
constexpr int kImageHeight = 480;
constexpr double kMinDepth = 2.0;
constexpr double kMaxDepth = 10.0;

struct SyntheticScene {
  Pose ground_truth;
  Intrinsics intrinsics;  // f = 500, principal point at the image center
  CorrespondenceSet correspondences;
  double pixel_noise_sigma = 0;
  uint64_t rng_seed = 0;
};

// Map points uniform in the image and in depth [2, 10] under the ground-truth
// pose; image points are their projections plus Gaussian pixel noise.
SyntheticScene gen_scene(size_t n, double noise_sigma, uint64_t rng_seed);

// Starting pose for a solve: the ground truth perturbed by up to `rot` rad
// and `trans` units per component, from its own stream of the scene seed.
Pose perturbed_start(const SyntheticScene& s, double rot = 0.05, double trans = 0.1);

// Per-seed generator; the same seed always gives the same stream.
std::mt19937_64 seeded_rng(uint64_t seed, uint64_t stream = 0);

struct PoseError {
  double translation = 0;  // Euclidean distance between translation vectors
  double rotation = 0;     // angle of the relative rotation, radians
};
PoseError pose_error(const Pose& estimate, const Pose& truth);

nlohmann::json scene_to_json(const SyntheticScene& s);
SyntheticScene scene_from_json(const nlohmann::json& j);
// Correspondences from a CSV of 2D-3D matches with header u,v,x,y,z.
CorrespondenceSet load_matches_csv(const std::string& path);

}  // namespace snail::harness
