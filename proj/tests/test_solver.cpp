#include <cmath>

#include "catch_amalgamated.hpp"
#include "harness/scene.hpp"
#include "obliv/cleartext.hpp"
#include "solver/iteration.hpp"
#include "solver/solver.hpp"

using namespace snail;
using solver::SolverConfig;

namespace {

double max_diff(const geometry::Pose& a, const geometry::Pose& b) {
  double d = 0;
  for (int i = 0; i < 6; ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

harness::SyntheticScene scene(uint64_t seed) {
  static const size_t ns[3] = {6, 8, 12};
  return harness::gen_scene(ns[seed % 3], 0, seed);
}

}  // namespace

TEST_CASE("plaintext LM recovers noise-free poses") {
  const SolverConfig cfg;
  int good = 0;
  for (uint64_t s = 0; s < 60; ++s) {
    const auto sc = scene(s);
    const auto r = solver::plaintext_localize(sc.correspondences, sc.intrinsics, harness::perturbed_start(sc), cfg);
    const auto e = harness::pose_error(r.pose, sc.ground_truth);
    good += r.converged && e.translation < 1e-3 && e.rotation < 1e-3;
  }
  REQUIRE(good >= 59);
}

TEST_CASE("plaintext GN also converges on noise-free scenes") {
  SolverConfig cfg;
  cfg.algorithm = solver::Algorithm::kGN;
  int good = 0;
  for (uint64_t s = 0; s < 30; ++s) {
    const auto sc = scene(s);
    try {
      const auto r = solver::plaintext_localize(sc.correspondences, sc.intrinsics, harness::perturbed_start(sc), cfg);
      good += r.converged && harness::pose_error(r.pose, sc.ground_truth).translation < 1e-3;
    } catch (const solver::SolverError&) {
    }
  }
  REQUIRE(good >= 28);
}

TEST_CASE("chained single iterations follow the plaintext trajectory") {
  const SolverConfig cfg;
  for (uint64_t s = 0; s < 12; ++s) {
    const auto sc = scene(s);
    const auto cf = geometry::correspondences_cast<float>(sc.correspondences);
    geometry::Pose x = harness::perturbed_start(sc);
    auto xf = geometry::pose_cast<float>(x);
    for (int it = 0; it < cfg.max_outer; ++it) {
      // Oracle: the float kernel run directly, no tape.
      const auto ref = solver::iteration<float>(cf, xf, sc.intrinsics, cfg);
      const auto got = solver::sil_step(sc.correspondences, sc.intrinsics, x, cfg);
      REQUIRE(max_diff(got.pose, geometry::pose_cast<double>(ref.pose)) <= 1e-5);
      REQUIRE(got.squared_error == Catch::Approx(ref.squared_error).epsilon(1e-5).margin(1e-6));
      REQUIRE_FALSE(got.overflow);
      x = got.pose;
      xf = ref.pose;
      if (ref.squared_error <= cfg.convergence_c) break;
    }
    const auto chain = solver::sil_localize(sc.correspondences, sc.intrinsics, harness::perturbed_start(sc), cfg);
    const auto plain =
        solver::plaintext_localize(sc.correspondences, sc.intrinsics, harness::perturbed_start(sc), cfg);
    REQUIRE(chain.converged == plain.converged);
    REQUIRE(chain.invocations == plain.iterations);
    REQUIRE(max_diff(chain.pose, plain.pose) <= 1e-5);
  }
}

TEST_CASE("the bounded-loop tape matches the early-stopped plaintext solve") {
  const SolverConfig cfg;
  for (uint64_t s = 0; s < 6; ++s) {
    const auto sc = scene(s);
    const auto x0 = harness::perturbed_start(sc);
    const auto d = solver::do_localize(sc.correspondences, sc.intrinsics, x0, cfg);
    const auto p = solver::plaintext_localize(sc.correspondences, sc.intrinsics, x0, cfg);
    REQUIRE(d.converged == p.converged);
    REQUIRE(max_diff(d.pose, p.pose) <= 1e-5);
  }
}

TEST_CASE("iteration tape layout and operation counts") {
  const geometry::Intrinsics k;
  SolverConfig cfg;
  REQUIRE(solver::iteration_input_count(6) == 36);
  REQUIRE(solver::iteration_input_count(6, false) == 30);
  const auto t = solver::build_iteration_tape(6, k, cfg);
  REQUIRE(t.inputs.size() == 36);
  REQUIRE(t.outputs.size() == 7);

  // Regression baseline of the LM iteration at n = 6.
  const auto h12 = obliv::op_histogram(t);
  CHECK(h12[obliv::OpKind::kMul] == 5843);
  CHECK(h12[obliv::OpKind::kDiv] == 959);
  const auto h30 = obliv::op_histogram(solver::build_iteration_tape(6, k, solver::baseline_config(cfg)));
  CHECK(h30[obliv::OpKind::kMul] == 11459);
  CHECK(h30[obliv::OpKind::kDiv] == 2039);
  REQUIRE(h30[obliv::OpKind::kMul] > 7000);
  REQUIRE(h30[obliv::OpKind::kDiv] > 1000);

  // The structure depends only on public sizes, never on values.
  REQUIRE(obliv::structure_digest(solver::build_iteration_tape(6, k, cfg)) == obliv::structure_digest(t));
  REQUIRE(obliv::structure_digest(solver::build_iteration_tape(7, k, cfg)) != obliv::structure_digest(t));
  REQUIRE(solver::cached_iteration_tape(6, k, cfg) == solver::cached_iteration_tape(6, k, cfg));
}

TEST_CASE("GN systems grow with n while LM systems stay 6x6") {
  const geometry::Intrinsics k;
  SolverConfig lm, gn;
  gn.algorithm = solver::Algorithm::kGN;
  const auto cost = [&](size_t n, const SolverConfig& c) { return obliv::tape_cost(*solver::cached_iteration_tape(n, k, c)).and_gates; };
  REQUIRE(cost(12, gn) > cost(12, lm));
  // GN decomposes the 2n×6 Jacobian, so its growth from n = 6 to 12 outpaces LM's.
  REQUIRE(static_cast<double>(cost(12, gn)) / cost(6, gn) > static_cast<double>(cost(12, lm)) / cost(6, lm));
}

TEST_CASE("solver errors and configuration") {
  const geometry::Intrinsics k;
  const SolverConfig cfg;
  auto sc = scene(0);
  sc.correspondences.map.resize(5);
  sc.correspondences.image.resize(5);
  REQUIRE_THROWS_AS(solver::plaintext_localize(sc.correspondences, k, sc.ground_truth, cfg), solver::SolverError);
  REQUIRE_THROWS_AS(solver::build_iteration_tape(5, k, cfg), solver::SolverError);

  SolverConfig bad;
  bad.lambda = 0;
  REQUIRE_THROWS_AS(bad.validate(), solver::ConfigError);
  bad = {};
  bad.svd_sweeps = 0;
  REQUIRE_THROWS_AS(bad.validate(), solver::ConfigError);

  SolverConfig c2;
  c2.algorithm = solver::Algorithm::kGN;
  c2.format = obliv::NumericFormat::fixed64(20);
  c2.max_outer = 7;
  REQUIRE(solver::config_from_json(solver::to_json(c2)) == c2);
  REQUIRE_THROWS_AS(solver::config_from_json(nlohmann::json{{"lamda", 1}}), solver::ConfigError);
  REQUIRE_THROWS_AS(solver::config_from_json(nlohmann::json{{"algorithm", "BFGS"}}), solver::ConfigError);
  const auto base = solver::baseline_config(cfg);
  REQUIRE(base.max_outer == 20);
  REQUIRE(base.svd_sweeps == 30);
  REQUIRE(base.lambda == cfg.lambda);
}

TEST_CASE("client convergence ignores steps with overflow") {
  const SolverConfig cfg;
  REQUIRE(solver::client_converged({{}, 1e-3, false}, cfg));
  REQUIRE_FALSE(solver::client_converged({{}, 1e-3, true}, cfg));
  REQUIRE_FALSE(solver::client_converged({{}, 1.0, false}, cfg));
}
