#pragma once

#include <string>
#include <vector>

#include "common/matrix.hpp"
#include "protocol/session.hpp"
#include "solver/config.hpp"

namespace snail::harness {

// ---- SVD sweep sufficiency ----

// LM system matrices JᵀJ + λ·diag(JᵀJ) met along float64 solves of noise-free
// scenes (n cycling through 6, 8, 12), in solve order.
std::vector<Matrix<double>> sample_lm_matrices(size_t count, uint64_t rng_seed, const solver::SolverConfig& cfg = {});

// max|superdiag| / max|diag| after each of sweeps 1..max_sweeps.
std::vector<double> superdiag_profile(const Matrix<double>& a, int max_sweeps);

// After bidiagonalization, some diagonal entry lies within tol·scale of its
// superdiagonal neighbour (magnitudes; scale = largest entry), with that
// superdiagonal itself above tol·scale.
bool near_degenerate(const Matrix<double>& a, double tol = 1e-5);

struct SweepRow {
  int sweeps = 0;
  uint64_t converged = 0;
  double rate = 0;
};

struct SweepStudy {
  size_t samples = 0;
  double tolerance = 1e-5;
  std::vector<SweepRow> rows;  // sweeps ascending
  uint64_t degenerate = 0;
  const SweepRow* at(int sweeps) const;
};

// samples >= 1000.
SweepStudy sweep_study(size_t samples, uint64_t rng_seed, int min_sweeps = 6, int max_sweeps = 30);
std::string sweep_csv(const SweepStudy& s);

// ---- Fixed64 vs Float32 ----

struct FormatRow {
  obliv::NumericFormat format;
  uint64_t add_and = 0, add_xor = 0, mul_and = 0, mul_xor = 0;
  size_t samples = 0;
  size_t converged = 0;                     // client saw err <= c without overflow
  size_t converged_ignoring_overflow = 0;   // err <= c, sticky overflow set or not
  size_t overflowed = 0;                    // chains that ever raised the overflow flag
  size_t accurate = 0;                      // converged and pose within 1e-3 of truth
  double rate() const { return samples ? static_cast<double>(converged) / samples : 0; }
};

// Chained SIL solves (cleartext backend, samples >= 100) over the standard
// battery: noise-free scenes with n cycling through 6, 8, 12 from perturbed
// starts.
std::vector<FormatRow> fixed_vs_float(size_t samples, uint64_t rng_seed, const solver::SolverConfig& base = {},
                                      std::vector<obliv::NumericFormat> formats = {});
std::string formats_csv(const std::vector<FormatRow>& rows);

// ---- transcript distinguisher ----

std::vector<double> transcript_features(const std::vector<protocol::ServerEntry>& t);

struct DistinguisherResult {
  size_t samples = 0;
  size_t positives = 0;
  double balanced_accuracy = 0.5;
};

// Leave-one-out decision stumps over transcript metadata features, guessing
// whether each invocation starts a new frame. Balanced accuracy, so chance
// is 0.5 whatever the class balance.
DistinguisherResult frame_boundary_distinguisher(const std::vector<std::vector<double>>& features,
                                                 const std::vector<int>& labels);

}  // namespace snail::harness
