#include "harness/bench.hpp"

#include <algorithm>
#include <cstdio>

#include "harness/scene.hpp"
#include "protocol/accounting.hpp"

namespace snail::harness {

const char* exec_mode_name(ExecMode m) { return m == ExecMode::kDo ? "do" : "sil"; }

ExecMode parse_exec_mode(const std::string& s) {
  if (s == "do" || s == "DO") return ExecMode::kDo;
  if (s == "sil" || s == "SIL") return ExecMode::kSil;
  throw solver::ConfigError("unknown mode '" + s + "'");
}

double median(std::vector<double> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  const size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

solver::SolverConfig mode_config(const BenchConfig& c, const solver::SolverConfig& base) {
  solver::SolverConfig cfg = c.mode == ExecMode::kDo ? solver::baseline_config(base) : base;
  cfg.algorithm = c.algorithm;
  cfg.format = c.format;
  return cfg;
}

BenchRow bench_row(const BenchConfig& c, const BenchOptions& o) {
  BenchRow row;
  row.config = c;
  const solver::SolverConfig cfg = mode_config(c, o.base);
  const Intrinsics k = gen_scene(std::max<size_t>(c.n, 6), 0, 0).intrinsics;
  obliv::CostReport cost;
  if (c.mode == ExecMode::kSil) {
    cost = obliv::tape_cost(*solver::cached_iteration_tape(c.n, k, cfg));
    std::vector<double> its;
    for (int s = 0; s < o.scenes; ++s) {
      const SyntheticScene sc = gen_scene(c.n, o.noise_sigma, o.rng_seed + static_cast<uint64_t>(s));
      its.push_back(solver::sil_localize(sc.correspondences, sc.intrinsics, perturbed_start(sc), cfg).invocations);
    }
    row.iterations = median(its);
  } else {
    cost = obliv::tape_cost(solver::build_do_tape(c.n, k, cfg));
    row.iterations = cfg.max_outer;
  }
  row.and_gates = cost.and_gates;
  row.xor_gates = cost.xor_gates;
  row.bytes = protocol::garbled_message_bytes(cost.and_gates);
  row.rounds = 2;
  return row;
}

std::vector<BenchRow> bench(const std::vector<BenchConfig>& configs, const BenchOptions& o) {
  std::vector<BenchRow> rows;
  for (const auto& c : configs) rows.push_back(bench_row(c, o));
  return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::string out = std::string(kBenchCsvHeader) + "\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%zu,%s,%s,%llu,%llu,%llu,%llu,%g\n",
                  solver::algorithm_name(r.config.algorithm).c_str(), r.config.n, r.config.format.name().c_str(),
                  exec_mode_name(r.config.mode), static_cast<unsigned long long>(r.and_gates),
                  static_cast<unsigned long long>(r.xor_gates), static_cast<unsigned long long>(r.bytes),
                  static_cast<unsigned long long>(r.rounds), r.iterations);
    out += buf;
  }
  return out;
}

void bench_from_json(const nlohmann::json& j, std::vector<BenchConfig>& configs, BenchOptions& opts) {
  try {
    configs.clear();
    for (const auto& r : j.value("rows", nlohmann::json::array())) {
      BenchConfig c;
      if (r.contains("algorithm")) c.algorithm = solver::parse_algorithm(r.at("algorithm").get<std::string>());
      if (r.contains("n")) c.n = r.at("n").get<size_t>();
      if (r.contains("format")) c.format = obliv::NumericFormat::parse(r.at("format").get<std::string>());
      if (r.contains("mode")) c.mode = parse_exec_mode(r.at("mode").get<std::string>());
      if (c.n < 6) throw solver::ConfigError("bench rows need n >= 6");
      configs.push_back(c);
    }
    opts.scenes = j.value("scenes", opts.scenes);
    opts.rng_seed = j.value("rng_seed", opts.rng_seed);
    opts.noise_sigma = j.value("noise_sigma", opts.noise_sigma);
    if (j.contains("solver")) opts.base = solver::config_from_json(j.at("solver"));
  } catch (const nlohmann::json::exception& e) {
    throw solver::ConfigError(std::string("bad bench config: ") + e.what());
  }
}

}  // namespace snail::harness
