#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "geometry/camera.hpp"
#include "obliv/cleartext.hpp"
#include "obliv/tape.hpp"
#include "solver/config.hpp"

namespace snail::solver {

using geometry::CorrespondenceSet;
using geometry::Intrinsics;
using geometry::Pose;

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr double kDivergenceThreshold = 1e12;

struct LocalizeResult {
  Pose pose;
  int iterations = 0;
  bool converged = false;
  double squared_error = 0;  // error at the pose of the last executed step
};

// Plaintext reference with a data-dependent loop (float32 arithmetic).
LocalizeResult plaintext_localize(const CorrespondenceSet& c, const Intrinsics& k, const Pose& x0,
                                  const SolverConfig& cfg);

struct StepResult {
  Pose pose;
  double squared_error = 0;
  bool overflow = false;
};

bool client_converged(const StepResult& s, const SolverConfig& cfg);

struct TapeOptions {
  bool pose_secret = true;  // false bakes the pose into the tape as constants
};

// Input layout: per point (xM, yM, zM, xI, yI), then the six pose entries when
// the pose is secret. Outputs: six pose entries, then the squared error.
obliv::ObliviousTape build_iteration_tape(size_t n, const Intrinsics& k, const SolverConfig& cfg,
                                          const TapeOptions& opt = {}, const Pose* public_pose = nullptr);
std::vector<uint64_t> iteration_inputs(const CorrespondenceSet& c, const Pose& x, obliv::NumericFormat fmt,
                                       bool pose_secret = true);
size_t iteration_input_count(size_t n, bool pose_secret = true);
StepResult decode_step(std::span<const uint64_t> outputs, bool overflow, obliv::NumericFormat fmt);

// Shared, immutable tape for (n, k, cfg); built on first use.
std::shared_ptr<const obliv::ObliviousTape> cached_iteration_tape(size_t n, const Intrinsics& k,
                                                                  const SolverConfig& cfg);

StepResult sil_step(const CorrespondenceSet& c, const Intrinsics& k, const Pose& x, const SolverConfig& cfg,
                    obliv::CostReport* cost = nullptr);

struct ChainResult {
  Pose pose;
  int invocations = 0;
  bool converged = false;
  std::vector<StepResult> steps;
  obliv::CostReport cost;
};

// Chains sil_step until the client sees convergence or max_outer steps ran.
ChainResult sil_localize(const CorrespondenceSet& c, const Intrinsics& k, const Pose& x0, const SolverConfig& cfg);

// max_outer iterations chained in one tape; updates freeze after convergence.
obliv::ObliviousTape build_do_tape(size_t n, const Intrinsics& k, const SolverConfig& cfg);

struct DoResult {
  Pose pose;
  double squared_error = 0;
  bool converged = false;
  bool overflow = false;
  obliv::CostReport cost;
};

DoResult do_localize(const CorrespondenceSet& c, const Intrinsics& k, const Pose& x0, const SolverConfig& cfg);

}  // namespace snail::solver
