#include "harness/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <random>

#include "harness/bench.hpp"
#include "harness/scene.hpp"
#include "solver/solver.hpp"

namespace snail::harness {

using geometry::Pose;

const char* sim_backend_name(SimBackend b) { return b == SimBackend::kGc ? "gc" : "cleartext"; }

SimBackend parse_sim_backend(const std::string& s) {
  if (s == "cleartext") return SimBackend::kCleartext;
  if (s == "gc") return SimBackend::kGc;
  throw solver::ConfigError("unknown backend '" + s + "'");
}

double TrajectoryRun::gate_ratio() const {
  const double its = std::max(1.0, median_invocations_after_first);
  return sil_gates_per_invocation ? static_cast<double>(do_gates_per_frame) / (its * sil_gates_per_invocation) : 0;
}

Pose approach_start(const Pose& target, double distance) {
  // Moving the camera back along its own optical axis adds to the depth of
  // every point, i.e. to tz.
  Pose p = target;
  p.tz += distance;
  return p;
}

namespace {

std::array<double, 3> to_camera(const Pose& p, const geometry::Vec3T<double>& m) {
  const auto r = geometry::rotation_matrix(p);
  return {r[0][0] * m.x + r[0][1] * m.y + r[0][2] * m.z + p.tx,
          r[1][0] * m.x + r[1][1] * m.y + r[1][2] * m.z + p.ty,
          r[2][0] * m.x + r[2][1] * m.y + r[2][2] * m.z + p.tz};
}

// Points uniform in the target's view, depth [2, 10], with a margin so they
// stay in frame while the camera closes in.
std::vector<geometry::Vec3T<double>> place_markers(const Pose& target, const Intrinsics& k, size_t count,
                                                   uint64_t seed) {
  auto rng = seeded_rng(seed, 3);
  const double margin = 40;
  std::uniform_real_distribution<double> uu(margin, kImageWidth - margin), vv(margin, kImageHeight - margin),
      zz(kMinDepth, kMaxDepth);
  const auto r = geometry::rotation_matrix(target);
  std::vector<geometry::Vec3T<double>> out;
  for (size_t i = 0; i < count; ++i) {
    const double u = uu(rng), v = vv(rng), z = zz(rng);
    const double pc[3] = {(u - k.cx) / k.fx * z - target.tx, (v - k.cy) / k.fy * z - target.ty, z - target.tz};
    // m = Rᵀ(p − t)
    out.push_back({r[0][0] * pc[0] + r[1][0] * pc[1] + r[2][0] * pc[2],
                   r[0][1] * pc[0] + r[1][1] * pc[1] + r[2][1] * pc[2],
                   r[0][2] * pc[0] + r[1][2] * pc[1] + r[2][2] * pc[2]});
  }
  return out;
}

// The first n markers that project inside the image in front of the camera.
std::optional<CorrespondenceSet> render(const Pose& truth, const Intrinsics& k,
                                        const std::vector<geometry::Vec3T<double>>& markers, size_t n, double sigma,
                                        std::mt19937_64& rng) {
  CorrespondenceSet c;
  std::normal_distribution<double> noise(0.0, sigma > 0 ? sigma : 1.0);
  for (const auto& m : markers) {
    if (c.size() == n) break;
    const auto p = to_camera(truth, m);
    if (p[2] < 0.5) continue;
    const double u = k.fx * p[0] / p[2] + k.cx, v = k.fy * p[1] / p[2] + k.cy;
    if (u < 0 || u >= kImageWidth || v < 0 || v >= kImageHeight) continue;
    c.map.push_back(m);
    c.image.push_back({sigma > 0 ? u + noise(rng) : u, sigma > 0 ? v + noise(rng) : v});
  }
  if (c.size() < n) return std::nullopt;
  return c;
}

bool finite(const Pose& p) {
  for (int i = 0; i < 6; ++i)
    if (!std::isfinite(p[i])) return false;
  return true;
}

}  // namespace

TrajectoryRun snail_sim(const SimOptions& o) {
  o.cfg.validate();
  if (o.n < 6) throw solver::ConfigError("the simulator needs n >= 6");
  if (o.max_frames < 1) throw solver::ConfigError("max_frames must be >= 1");
  if (!(o.max_step > 0) || !(o.max_rot_step > 0) || !(o.gain > 0) || o.gain > 1)
    throw solver::ConfigError("controller needs positive steps and gain in (0, 1]");
  const Intrinsics k;
  TrajectoryRun run;

  const auto sil = obliv::tape_cost(*solver::cached_iteration_tape(o.n, k, o.cfg));
  const auto dop = obliv::tape_cost(solver::build_do_tape(o.n, k, solver::baseline_config(o.cfg)));
  run.sil_gates_per_invocation = sil.and_gates + sil.xor_gates;
  run.do_gates_per_frame = dop.and_gates + dop.xor_gates;
  const uint64_t garbled = protocol::garbled_message_bytes(sil.and_gates);

  std::unique_ptr<protocol::LocalSession> session;
  if (o.backend == SimBackend::kGc) {
    protocol::SessionParams p;
    p.session_id = o.rng_seed;
    p.n = o.n;
    p.k = k;
    p.cfg = o.cfg;
    session = std::make_unique<protocol::LocalSession>(p);
  }

  const auto markers = place_markers(o.target, k, std::max(o.markers, o.n), o.rng_seed);
  auto noise_rng = seeded_rng(o.rng_seed, 2);
  SyntheticScene first;
  first.ground_truth = o.start;
  first.rng_seed = o.rng_seed;
  Pose truth = o.start;
  Pose initial = perturbed_start(first);

  for (int f = 0; f < o.max_frames; ++f) {
    const auto c = render(truth, k, markers, o.n, o.noise_sigma, noise_rng);
    if (!c) {
      run.diagnostic = "frame " + std::to_string(f) + ": fewer than " + std::to_string(o.n) + " markers in view";
      break;
    }
    FrameRecord fr;
    fr.truth = truth;
    fr.initial = initial;
    Pose x = initial;
    bool budget = false;
    for (int it = 0; it < o.cfg.max_outer; ++it) {
      if (o.max_invocations && run.total_invocations >= o.max_invocations) {
        budget = true;
        break;
      }
      solver::StepResult s;
      if (session) {
        protocol::InvocationResult raw;
        s = session->invoke(*c, x, &raw);
        fr.comm += raw.comm;
      } else {
        s = solver::sil_step(*c, k, x, o.cfg);
      }
      run.starts_frame.push_back(it == 0);
      ++run.total_invocations;
      ++fr.invocations;
      fr.garbled_bytes += garbled;
      x = s.pose;
      if (solver::client_converged(s, o.cfg)) {
        fr.converged = true;
        break;
      }
      if (!finite(x) || s.squared_error > solver::kDivergenceThreshold) break;
    }
    fr.estimate = x;
    fr.estimate_error = pose_error(x, truth).translation;
    const PoseError to_target = pose_error(truth, o.target);
    fr.distance_to_target = to_target.translation;
    fr.rotation_to_target = to_target.rotation;
    if (fr.invocations) run.frames.push_back(fr);
    if (budget) break;
    if (!fr.converged) {
      run.diagnostic = "frame " + std::to_string(f) + ": localization did not converge in " +
                       std::to_string(fr.invocations) + " invocations";
      break;
    }
    const PoseError est = pose_error(x, o.target);
    if (est.translation < o.stop_threshold && est.rotation < o.stop_threshold) {
      run.reached_target = true;
      if (o.stop_at_target) break;
    }
    if (f + 1 == o.max_frames) break;

    // Bounded proportional step from the estimate toward the target.
    Pose delta;
    double tn = 0;
    for (int i = 3; i < 6; ++i) {
      delta[i] = o.gain * (o.target[i] - x[i]);
      tn += delta[i] * delta[i];
    }
    tn = std::sqrt(tn);
    if (tn > o.max_step)
      for (int i = 3; i < 6; ++i) delta[i] *= o.max_step / tn;
    for (int i = 0; i < 3; ++i) delta[i] = std::clamp(o.gain * (o.target[i] - x[i]), -o.max_rot_step, o.max_rot_step);
    for (int i = 0; i < 6; ++i) {
      truth[i] += delta[i];
      initial[i] = o.predict_motion ? x[i] + delta[i] : x[i];
    }
    ++run.movement_steps;
  }

  if (session) {
    session->close();
    run.transcripts = session->server_transcripts();
  }
  std::vector<double> later;
  for (size_t i = 1; i < run.frames.size(); ++i) later.push_back(run.frames[i].invocations);
  run.median_invocations_after_first = median(later);
  run.privacy = protocol::privacy_bound(run.total_invocations, static_cast<uint64_t>(o.cfg.max_outer));
  return run;
}

std::string trajectory_csv(const TrajectoryRun& r) {
  std::string out =
      "frame,invocations,converged,estimate_error,distance_to_target,rotation_to_target,garbled_bytes,tx,ty,tz\n";
  char buf[256];
  for (size_t i = 0; i < r.frames.size(); ++i) {
    const auto& f = r.frames[i];
    std::snprintf(buf, sizeof buf, "%zu,%d,%d,%.9g,%.9g,%.9g,%llu,%.9g,%.9g,%.9g\n", i, f.invocations, f.converged ? 1 : 0,
                  f.estimate_error, f.distance_to_target, f.rotation_to_target,
                  static_cast<unsigned long long>(f.garbled_bytes), f.truth.tx, f.truth.ty, f.truth.tz);
    out += buf;
  }
  return out;
}

}  // namespace snail::harness
