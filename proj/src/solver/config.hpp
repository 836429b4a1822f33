#pragma once

#include <string>

#include "json.hpp"
#include "obliv/format.hpp"

namespace snail::solver {

enum class Algorithm { kGN, kLM };

std::string algorithm_name(Algorithm a);
Algorithm parse_algorithm(const std::string& s);

struct SolverConfig {
  Algorithm algorithm = Algorithm::kLM;
  double lambda = 1e-3;         // LM damping, public
  double convergence_c = 1e-2;  // threshold on the summed squared residual (px²)
  double epsilon = 1e-4;        // forward-difference step
  int max_outer = 20;
  int svd_sweeps = 12;
  obliv::NumericFormat format = obliv::NumericFormat::float32();

  void validate() const;
  friend bool operator==(const SolverConfig&, const SolverConfig&) = default;
};

// The data-oblivious baseline bounds: 20 outer iterations, 30 sweeps.
SolverConfig baseline_config(SolverConfig cfg = {});

nlohmann::json to_json(const SolverConfig& c);
SolverConfig config_from_json(const nlohmann::json& j);

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace snail::solver
