#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "catch_amalgamated.hpp"
#include "harness/bench.hpp"
#include "harness/scene.hpp"
#include "harness/sim.hpp"
#include "harness/studies.hpp"

using namespace snail;
using namespace snail::harness;
using Catch::Approx;

TEST_CASE("scenes are deterministic and lie in view") {
  const auto a = gen_scene(12, 0.5, 77), b = gen_scene(12, 0.5, 77), c = gen_scene(12, 0.5, 78);
  REQUIRE(a.correspondences.image == b.correspondences.image);
  REQUIRE(a.correspondences.map == b.correspondences.map);
  REQUIRE_FALSE(a.correspondences.image == c.correspondences.image);
  const auto clean = gen_scene(12, 0, 77);
  for (size_t i = 0; i < 12; ++i) {
    const auto p = geometry::project(clean.ground_truth, clean.intrinsics, clean.correspondences.map[i]);
    REQUIRE(p.x == Approx(clean.correspondences.image[i].x).margin(1e-9));
    REQUIRE(p.y == Approx(clean.correspondences.image[i].y).margin(1e-9));
    REQUIRE(p.x >= 0);
    REQUIRE(p.x <= kImageWidth);
    REQUIRE(p.y >= 0);
    REQUIRE(p.y <= kImageHeight);
  }
  const auto x0 = perturbed_start(a);
  const auto e = pose_error(x0, a.ground_truth);
  REQUIRE(e.translation > 0);
  REQUIRE(e.translation <= std::sqrt(3.0) * 0.1 + 1e-12);
  REQUIRE(pose_error(a.ground_truth, a.ground_truth).rotation == Approx(0).margin(1e-7));
}

TEST_CASE("scene JSON and match CSV round trips") {
  const auto s = gen_scene(8, 1.0, 5);
  const auto back = scene_from_json(nlohmann::json::parse(scene_to_json(s).dump()));
  REQUIRE(back.correspondences.map == s.correspondences.map);
  REQUIRE(back.correspondences.image == s.correspondences.image);
  REQUIRE(back.ground_truth.tz == s.ground_truth.tz);
  REQUIRE(back.rng_seed == 5);

  const std::string path = "harness_matches.csv";
  {
    std::ofstream out(path);
    out.precision(17);
    out << "u,v,x,y,z\n";
    for (size_t i = 0; i < 8; ++i) {
      const auto& u = s.correspondences.image[i];
      const auto& m = s.correspondences.map[i];
      out << u.x << ',' << u.y << ',' << m.x << ',' << m.y << ',' << m.z << '\n';
    }
  }
  const auto c = load_matches_csv(path);
  REQUIRE(c.map == s.correspondences.map);
  REQUIRE(c.image == s.correspondences.image);
  {
    std::ofstream out(path);
    out << "u,v,x,y,z\n1,2,3\n";
  }
  REQUIRE_THROWS_AS(load_matches_csv(path), geometry::GeometryError);
  std::remove(path.c_str());
  REQUIRE_THROWS_AS(scene_from_json(nlohmann::json{{"ground_truth", 3}}), geometry::GeometryError);
}

TEST_CASE("bench rows report per-invocation costs") {
  std::vector<BenchConfig> cfgs;
  BenchOptions opts;
  bench_from_json(nlohmann::json::parse(R"({"rows":[{"n":6,"mode":"sil"}],"scenes":4})"), cfgs, opts);
  REQUIRE(cfgs.size() == 1);
  REQUIRE(opts.scenes == 4);
  const auto rows = bench(cfgs, opts);
  REQUIRE(rows[0].and_gates > 1000000);
  REQUIRE(rows[0].rounds == 2);
  REQUIRE(rows[0].iterations >= 1);
  const auto csv = bench_csv(rows);
  REQUIRE(csv.rfind(std::string(kBenchCsvHeader) + "\n", 0) == 0);
  REQUIRE(std::count(csv.begin(), csv.end(), '\n') == 2);
  REQUIRE_THROWS_AS(bench_from_json(nlohmann::json::parse(R"({"rows":[{"n":4}]})"), cfgs, opts), solver::ConfigError);
  REQUIRE(median({3, 1, 2}) == 2);
  REQUIRE(median({4, 1, 2, 3}) == 2.5);
}

TEST_CASE("a sim that starts on target never moves") {
  SimOptions o;
  o.target = gen_scene(6, 0, 1).ground_truth;
  o.start = o.target;
  const auto r = snail_sim(o);
  REQUIRE(r.reached_target);
  REQUIRE(r.movement_steps == 0);
  REQUIRE(r.frames.size() == 1);
}

TEST_CASE("the servo loop makes progress toward the target") {
  SimOptions o;
  o.target = gen_scene(6, 0, 1).ground_truth;
  o.start = approach_start(o.target, 1.0);
  o.max_frames = 30;
  const auto r = snail_sim(o);
  REQUIRE(r.diagnostic.empty());
  REQUIRE(r.frames.size() >= 6);
  for (size_t i = 5; i < r.frames.size(); i += 5)
    REQUIRE(r.frames[i].distance_to_target < r.frames[i - 5].distance_to_target);
  REQUIRE(r.starts_frame.size() == r.total_invocations);
  REQUIRE(r.sil_gates_per_invocation > 0);
  REQUIRE(r.do_gates_per_frame > r.sil_gates_per_invocation);
  REQUIRE(r.privacy.o == r.total_invocations);
  const auto csv = trajectory_csv(r);
  REQUIRE(csv.rfind("frame,invocations,", 0) == 0);
}

TEST_CASE("sweep study preconditions and shape") {
  REQUIRE_THROWS_AS(sweep_study(999, 1), solver::ConfigError);
  const auto s = sweep_study(1000, 1, 10, 14);
  REQUIRE(s.samples == 1000);
  REQUIRE(s.rows.size() == 5);
  REQUIRE(s.at(12) != nullptr);
  REQUIRE(s.at(31) == nullptr);
  for (size_t i = 1; i < s.rows.size(); ++i) REQUIRE(s.rows[i].converged >= s.rows[i - 1].converged);
  REQUIRE(sweep_csv(s).rfind("sweeps,samples,converged,rate,degenerate\n", 0) == 0);
}

TEST_CASE("near-degenerate detector") {
  // Diagonal already: no superdiagonal to be close to.
  Matrix<double> d(6, 6, 0.0);
  for (int i = 0; i < 6; ++i) d(i, i) = 10.0 - i;
  REQUIRE_FALSE(near_degenerate(d));
  const auto m = sample_lm_matrices(20, 3);
  REQUIRE(m.size() == 20);
  const auto prof = superdiag_profile(m[0], 8);
  REQUIRE(prof.size() == 8);
  REQUIRE(prof.back() <= prof.front());
}

TEST_CASE("format comparison preconditions") {
  REQUIRE_THROWS_AS(fixed_vs_float(99, 1), solver::ConfigError);
  const auto rows = fixed_vs_float(100, 1);
  REQUIRE(rows.size() == 2);
  REQUIRE(rows[0].format == obliv::NumericFormat::float32());
  REQUIRE(rows[0].rate() > 0.95);
  REQUIRE(rows[1].mul_and > rows[0].mul_and);
  REQUIRE(rows[1].add_and < rows[0].add_and);
}

TEST_CASE("distinguisher sanity") {
  std::mt19937_64 rng(8);
  std::vector<std::vector<double>> feats;
  std::vector<int> labels;
  for (int i = 0; i < 60; ++i) {
    const int y = i % 3 == 0;
    labels.push_back(y);
    feats.push_back({static_cast<double>(rng() % 100), y ? 5.0 : 1.0});
  }
  // A feature that reveals the label is found.
  REQUIRE(frame_boundary_distinguisher(feats, labels).balanced_accuracy == Approx(1.0));
  // Constant features leave it at chance.
  for (auto& f : feats) f = {1.0, 2.0};
  REQUIRE(frame_boundary_distinguisher(feats, labels).balanced_accuracy == Approx(0.5));
}
