#include "solver/config.hpp"

#include <cmath>

namespace snail::solver {

std::string algorithm_name(Algorithm a) { return a == Algorithm::kGN ? "GN" : "LM"; }

Algorithm parse_algorithm(const std::string& s) {
  if (s == "GN" || s == "gn") return Algorithm::kGN;
  if (s == "LM" || s == "lm") return Algorithm::kLM;
  throw ConfigError("unknown algorithm '" + s + "'");
}

void SolverConfig::validate() const {
  if (algorithm == Algorithm::kLM && !(lambda > 0)) throw ConfigError("lambda must be > 0 for LM");
  if (!(convergence_c > 0)) throw ConfigError("convergence_c must be > 0");
  if (!(epsilon > 0)) throw ConfigError("epsilon must be > 0");
  if (max_outer < 1) throw ConfigError("max_outer must be >= 1");
  if (svd_sweeps < 1) throw ConfigError("svd_sweeps must be >= 1");
}

SolverConfig baseline_config(SolverConfig cfg) {
  cfg.max_outer = 20;
  cfg.svd_sweeps = 30;
  return cfg;
}

nlohmann::json to_json(const SolverConfig& c) {
  return {{"algorithm", algorithm_name(c.algorithm)},
          {"lambda", c.lambda},
          {"convergence_c", c.convergence_c},
          {"epsilon", c.epsilon},
          {"max_outer", c.max_outer},
          {"svd_sweeps", c.svd_sweeps},
          {"format", c.format.name()}};
}

SolverConfig config_from_json(const nlohmann::json& j) {
  SolverConfig c;
  static const char* known[] = {"algorithm", "lambda", "convergence_c", "epsilon", "max_outer", "svd_sweeps",
                                "format"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok |= it.key() == k;
    if (!ok) throw ConfigError("unknown solver config field '" + it.key() + "'");
  }
  try {
    if (j.contains("algorithm")) c.algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
    if (j.contains("lambda")) c.lambda = j.at("lambda").get<double>();
    if (j.contains("convergence_c")) c.convergence_c = j.at("convergence_c").get<double>();
    if (j.contains("epsilon")) c.epsilon = j.at("epsilon").get<double>();
    if (j.contains("max_outer")) c.max_outer = j.at("max_outer").get<int>();
    if (j.contains("svd_sweeps")) c.svd_sweeps = j.at("svd_sweeps").get<int>();
    if (j.contains("format")) c.format = obliv::NumericFormat::parse(j.at("format").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad solver config: ") + e.what());
  }
  c.validate();
  return c;
}

}  // namespace snail::solver
