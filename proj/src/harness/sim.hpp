#pragma once

#include <optional>
#include <string>
#include <vector>

#include "geometry/camera.hpp"
#include "protocol/accounting.hpp"
#include "protocol/session.hpp"
#include "solver/config.hpp"

namespace snail::harness {

enum class SimBackend { kCleartext, kGc };
const char* sim_backend_name(SimBackend b);
SimBackend parse_sim_backend(const std::string& s);

struct SimOptions {
  geometry::Pose start;   // true camera pose at frame 0
  geometry::Pose target;  // pose the controller drives toward
  double gain = 0.5;           // fraction of the remaining offset per frame
  double max_step = 0.1;       // translation per frame, scene units
  double max_rot_step = 0.05;  // per Euler angle per frame, radians
  int max_frames = 50;
  double stop_threshold = 1e-3;  // translation and rotation error to target
  bool stop_at_target = true;
  double noise_sigma = 0;  // pixel noise on rendered image points
  size_t n = 6;            // correspondences per localization
  size_t markers = 24;     // world points scattered in view of the target
  uint64_t rng_seed = 1;
  // Frame k > 0 starts from the previous estimate advanced by the commanded
  // motion; otherwise from the previous estimate as is.
  bool predict_motion = true;
  solver::SolverConfig cfg;
  SimBackend backend = SimBackend::kCleartext;
  uint64_t max_invocations = 0;  // 0: unlimited; otherwise the run stops there
};

struct FrameRecord {
  geometry::Pose truth;     // true camera pose when the frame was taken
  geometry::Pose initial;   // solver starting pose
  geometry::Pose estimate;  // localized pose
  int invocations = 0;
  bool converged = false;
  double estimate_error = 0;     // translation error of the estimate vs truth
  double distance_to_target = 0; // true translation distance to the target
  double rotation_to_target = 0;
  uint64_t garbled_bytes = 0;    // generator to evaluator, predicted
  protocol::CommReport comm;     // client links, gc backend only
};

struct TrajectoryRun {
  std::vector<FrameRecord> frames;
  int movement_steps = 0;
  bool reached_target = false;
  std::string diagnostic;  // set when the run ended early on a failure
  uint64_t total_invocations = 0;
  double median_invocations_after_first = 0;
  protocol::PrivacyBound privacy;
  uint64_t sil_gates_per_invocation = 0;  // AND + XOR
  uint64_t do_gates_per_frame = 0;
  // Per invocation, whether it was the first of its frame.
  std::vector<int> starts_frame;
  // gc backend: server-observable metadata per invocation.
  std::vector<std::vector<protocol::ServerEntry>> transcripts;

  double gate_ratio() const;
};

// Position-based visual servoing with localization by chained single
// iterations: localize, step toward the target, re-render, repeat.
TrajectoryRun snail_sim(const SimOptions& o);

// Start pose `distance` units behind `target` along its optical axis.
geometry::Pose approach_start(const geometry::Pose& target, double distance);

std::string trajectory_csv(const TrajectoryRun& r);

}  // namespace snail::harness
