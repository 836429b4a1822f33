#include "solver/solver.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include "solver/iteration.hpp"

namespace snail::solver {

using obliv::Secret;
using obliv::SecretBit;
using obliv::TapeBuilder;

namespace {

void check_points(size_t n) {
  if (n < 6) throw SolverError("solver needs at least 6 correspondences, got " + std::to_string(n));
}

struct SecretInputs {
  geometry::CorrespondencesT<Secret> corr;
  geometry::PoseT<Secret> pose;
};

SecretInputs declare_inputs(TapeBuilder& b, size_t n, bool pose_secret, const Pose* public_pose) {
  SecretInputs in;
  for (size_t i = 0; i < n; ++i) {
    geometry::Vec3T<Secret> m{b.input(), b.input(), b.input()};
    geometry::Vec2T<Secret> q{b.input(), b.input()};
    in.corr.map.push_back(m);
    in.corr.image.push_back(q);
  }
  for (int d = 0; d < 6; ++d) in.pose[d] = pose_secret ? b.input() : b.constant((*public_pose)[d]);
  return in;
}

using CacheKey = std::tuple<int, size_t, double, double, double, double, std::string>;

CacheKey cache_key(int kind, size_t n, const Intrinsics& k, const SolverConfig& cfg) {
  return {kind, n, k.fx, k.fy, k.cx, k.cy, to_json(cfg).dump()};
}

std::shared_ptr<const obliv::ObliviousTape> cached(int kind, size_t n, const Intrinsics& k,
                                                   const SolverConfig& cfg) {
  static std::mutex mu;
  static std::map<CacheKey, std::shared_ptr<const obliv::ObliviousTape>> cache;
  const CacheKey key = cache_key(kind, n, k, cfg);
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  auto tape = std::make_shared<const obliv::ObliviousTape>(kind == 0 ? build_iteration_tape(n, k, cfg)
                                                                     : build_do_tape(n, k, cfg));
  std::lock_guard<std::mutex> lock(mu);
  return cache.emplace(key, tape).first->second;
}

}  // namespace

LocalizeResult plaintext_localize(const CorrespondenceSet& c, const Intrinsics& k, const Pose& x0,
                                  const SolverConfig& cfg) {
  cfg.validate();
  check_points(c.size());
  const auto cf = geometry::correspondences_cast<float>(c);
  geometry::PoseT<float> x = geometry::pose_cast<float>(x0);
  LocalizeResult res;
  for (int it = 0; it < cfg.max_outer; ++it) {
    const IterationOutput<float> out = iteration(cf, x, k, cfg);
    res.iterations = it + 1;
    res.squared_error = out.squared_error;
    if (!(out.squared_error <= kDivergenceThreshold)) throw SolverError("diverged");
    if (cfg.algorithm == Algorithm::kGN) {
      float smax = 0, smin = INFINITY;
      for (float s : out.sigma) smax = std::max(smax, s), smin = std::min(smin, s);
      if (!(smin > static_cast<float>(linalg::kPinvTau) * smax)) throw SolverError("rank deficient");
    }
    x = out.pose;
    if (out.squared_error <= cfg.convergence_c) {
      res.converged = true;
      break;
    }
  }
  res.pose = geometry::pose_cast<double>(x);
  return res;
}

bool client_converged(const StepResult& s, const SolverConfig& cfg) {
  return !s.overflow && s.squared_error <= cfg.convergence_c;
}

obliv::ObliviousTape build_iteration_tape(size_t n, const Intrinsics& k, const SolverConfig& cfg,
                                          const TapeOptions& opt, const Pose* public_pose) {
  cfg.validate();
  check_points(n);
  if (!opt.pose_secret && !public_pose) throw SolverError("public-pose tape needs a pose");
  TapeBuilder b(cfg.format);
  obliv::BuildScope scope(b);
  const SecretInputs in = declare_inputs(b, n, opt.pose_secret, public_pose);
  const IterationOutput<Secret> out = iteration(in.corr, in.pose, k, cfg);
  for (int d = 0; d < 6; ++d) b.output(out.pose[d]);
  b.output(out.squared_error);
  return b.finish();
}

size_t iteration_input_count(size_t n, bool pose_secret) { return 5 * n + (pose_secret ? 6 : 0); }

std::vector<uint64_t> iteration_inputs(const CorrespondenceSet& c, const Pose& x, obliv::NumericFormat fmt,
                                       bool pose_secret) {
  std::vector<uint64_t> v;
  v.reserve(iteration_input_count(c.size(), pose_secret));
  for (size_t i = 0; i < c.size(); ++i) {
    for (double m : {c.map[i].x, c.map[i].y, c.map[i].z}) v.push_back(obliv::encode(m, fmt));
    v.push_back(obliv::encode(c.image[i].x, fmt));
    v.push_back(obliv::encode(c.image[i].y, fmt));
  }
  if (pose_secret)
    for (int d = 0; d < 6; ++d) v.push_back(obliv::encode(x[d], fmt));
  return v;
}

StepResult decode_step(std::span<const uint64_t> outputs, bool overflow, obliv::NumericFormat fmt) {
  if (outputs.size() < 7) throw SolverError("step output needs 7 values");
  StepResult s;
  for (int d = 0; d < 6; ++d) s.pose[d] = obliv::decode(outputs[d], fmt);
  s.squared_error = obliv::decode(outputs[6], fmt);
  s.overflow = overflow;
  return s;
}

std::shared_ptr<const obliv::ObliviousTape> cached_iteration_tape(size_t n, const Intrinsics& k,
                                                                  const SolverConfig& cfg) {
  return cached(0, n, k, cfg);
}

StepResult sil_step(const CorrespondenceSet& c, const Intrinsics& k, const Pose& x, const SolverConfig& cfg,
                    obliv::CostReport* cost) {
  const auto tape = cached_iteration_tape(c.size(), k, cfg);
  const auto r = obliv::run_cleartext(*tape, iteration_inputs(c, x, cfg.format));
  if (cost) *cost += r.cost;
  return decode_step(r.outputs, r.overflow, cfg.format);
}

ChainResult sil_localize(const CorrespondenceSet& c, const Intrinsics& k, const Pose& x0,
                         const SolverConfig& cfg) {
  ChainResult res;
  res.pose = x0;
  for (int it = 0; it < cfg.max_outer; ++it) {
    const StepResult s = sil_step(c, k, res.pose, cfg, &res.cost);
    res.steps.push_back(s);
    res.invocations = it + 1;
    res.pose = s.pose;
    if (client_converged(s, cfg)) {
      res.converged = true;
      break;
    }
  }
  return res;
}

obliv::ObliviousTape build_do_tape(size_t n, const Intrinsics& k, const SolverConfig& cfg) {
  cfg.validate();
  check_points(n);
  TapeBuilder b(cfg.format);
  obliv::BuildScope scope(b);
  const SecretInputs in = declare_inputs(b, n, true, nullptr);
  const Secret c(cfg.convergence_c);
  geometry::PoseT<Secret> x = in.pose;
  Secret err(0.0);
  SecretBit done = b.constant_bit(false);
  for (int it = 0; it < cfg.max_outer; ++it) {
    const IterationOutput<Secret> out = iteration(in.corr, x, k, cfg);
    // Updates after the converging iteration are discarded.
    for (int d = 0; d < 6; ++d) x[d] = select(done, x[d], out.pose[d]);
    err = select(done, err, out.squared_error);
    done = lor(done, lnot(less(c, out.squared_error)));
  }
  for (int d = 0; d < 6; ++d) b.output(x[d]);
  b.output(err);
  b.output(done);
  return b.finish();
}

DoResult do_localize(const CorrespondenceSet& c, const Intrinsics& k, const Pose& x0, const SolverConfig& cfg) {
  const auto tape = cached(1, c.size(), k, cfg);
  const auto r = obliv::run_cleartext(*tape, iteration_inputs(c, x0, cfg.format));
  const StepResult s = decode_step(r.outputs, r.overflow, cfg.format);
  DoResult d;
  d.pose = s.pose;
  d.squared_error = s.squared_error;
  d.converged = r.outputs[7] != 0 && !r.overflow;
  d.overflow = r.overflow;
  d.cost = r.cost;
  return d;
}

}  // namespace snail::solver
