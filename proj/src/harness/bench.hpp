#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "obliv/cleartext.hpp"
#include "solver/solver.hpp"

namespace snail::harness {

enum class ExecMode { kDo, kSil };
const char* exec_mode_name(ExecMode m);
ExecMode parse_exec_mode(const std::string& s);

struct BenchConfig {
  solver::Algorithm algorithm = solver::Algorithm::kLM;
  size_t n = 6;
  obliv::NumericFormat format = obliv::NumericFormat::float32();
  ExecMode mode = ExecMode::kSil;
};

struct BenchOptions {
  int scenes = 10;  // scenes solved to measure iteration counts
  uint64_t rng_seed = 1;
  double noise_sigma = 0;
  solver::SolverConfig base;  // lambda, thresholds; sweeps/max_outer are set per mode
};

// Gates and garbled bytes are per invocation: one iteration for SIL, the
// whole bounded loop for DO. `iterations` is the median number of SIL
// invocations to converge, or the fixed outer bound for DO.
struct BenchRow {
  BenchConfig config;
  uint64_t and_gates = 0;
  uint64_t xor_gates = 0;
  uint64_t bytes = 0;
  uint64_t rounds = 0;
  double iterations = 0;
};

// The solver configuration a mode runs with: SIL keeps the base bounds, DO
// uses the baseline bounds (20 outer iterations, 30 sweeps).
solver::SolverConfig mode_config(const BenchConfig& c, const solver::SolverConfig& base);

BenchRow bench_row(const BenchConfig& c, const BenchOptions& o);
std::vector<BenchRow> bench(const std::vector<BenchConfig>& configs, const BenchOptions& o);

constexpr const char* kBenchCsvHeader = "algorithm,n,format,mode,and_gates,xor_gates,bytes,rounds,iterations";
std::string bench_csv(const std::vector<BenchRow>& rows);

// {"rows": [{"algorithm", "n", "format", "mode"}...], "scenes", "rng_seed",
//  "noise_sigma", "solver": {...}}
void bench_from_json(const nlohmann::json& j, std::vector<BenchConfig>& configs, BenchOptions& opts);

double median(std::vector<double> v);

}  // namespace snail::harness
