#define SNAIL_BUILDING_LIBRARY
#include "snail/snail.h"

#include <cstring>
#include <memory>
#include <mutex>
#include <string>

#include "harness/bench.hpp"
#include "harness/scene.hpp"
#include "harness/sim.hpp"
#include "harness/studies.hpp"
#include "protocol/server.hpp"
#include "protocol/session.hpp"
#include "solver/solver.hpp"

using namespace snail;

struct snail_config {
  solver::SolverConfig cfg;
};

struct snail_scene {
  harness::SyntheticScene scene;
};

struct snail_session {
  protocol::SessionParams params;
  std::unique_ptr<protocol::LocalSession> local;
  std::unique_ptr<protocol::RemoteSession> remote;
  std::shared_ptr<std::mutex> map_mu = std::make_shared<std::mutex>();
  std::shared_ptr<std::vector<uint64_t>> map_words = std::make_shared<std::vector<uint64_t>>();

  protocol::ClientSession& client() { return local ? local->client() : remote->client(); }
  void set_map(const geometry::CorrespondenceSet& c) {
    if (params.mode != protocol::Mode::kSplit) return;
    auto w = protocol::map_input_words(c, params.cfg.format);
    if (local) {
      local->set_map_words(std::move(w));
    } else {
      std::lock_guard lk(*map_mu);
      *map_words = std::move(w);
    }
  }
};

struct snail_server {
  std::unique_ptr<protocol::Server> server;
};

namespace {

thread_local std::string g_error;

snail_status fail(snail_status code, const std::string& msg) {
  g_error = msg;
  return code;
}

// Runs fn, mapping exceptions onto status codes.
template <class Fn>
int guard(Fn&& fn) {
  g_error.clear();
  try {
    return fn();
  } catch (const solver::ConfigError& e) {
    return fail(SNAIL_E_CONFIG, e.what());
  } catch (const obliv::FormatError& e) {
    return fail(SNAIL_E_CONFIG, e.what());
  } catch (const geometry::GeometryError& e) {
    return fail(SNAIL_E_GEOMETRY, e.what());
  } catch (const DimensionError& e) {
    return fail(SNAIL_E_GEOMETRY, e.what());
  } catch (const protocol::ProtocolError& e) {
    return fail(SNAIL_E_PROTOCOL, e.what());
  } catch (const gc::GcError& e) {
    return fail(SNAIL_E_PROTOCOL, e.what());
  } catch (const solver::SolverError& e) {
    return fail(SNAIL_E_DIVERGED, e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(SNAIL_E_CONFIG, e.what());
  } catch (const std::exception& e) {
    return fail(SNAIL_E_INTERNAL, e.what());
  } catch (...) {
    return fail(SNAIL_E_INTERNAL, "unknown failure");
  }
}

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

nlohmann::json parse_json(const char* text) {
  if (!text || !*text) return nlohmann::json::object();
  auto j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) throw solver::ConfigError("input is not valid JSON");
  return j;
}

geometry::Pose from_c(const snail_pose& p) { return {p.rx, p.ry, p.rz, p.tx, p.ty, p.tz}; }
snail_pose to_c(const geometry::Pose& p) { return {p.rx, p.ry, p.rz, p.tx, p.ty, p.tz}; }
snail_comm to_c(const protocol::CommReport& r) {
  return {r.client_tx_bits, r.client_rx_bits, r.server_tx_bits, r.rounds};
}

geometry::Pose pose_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 6) throw solver::ConfigError("a pose is an array of 6 numbers");
  geometry::Pose p;
  for (int i = 0; i < 6; ++i) p[i] = j[i].get<double>();
  return p;
}

harness::SimOptions sim_options(const nlohmann::json& j) {
  harness::SimOptions o;
  if (j.contains("solver")) o.cfg = solver::config_from_json(j.at("solver"));
  if (j.contains("target")) o.target = pose_from_json(j.at("target"));
  if (j.contains("start"))
    o.start = pose_from_json(j.at("start"));
  else
    o.start = harness::approach_start(o.target, j.value("approach", 2.0));
  o.max_frames = j.value("frames", o.max_frames);
  o.gain = j.value("gain", o.gain);
  o.max_step = j.value("max_step", o.max_step);
  o.max_rot_step = j.value("max_rot_step", o.max_rot_step);
  o.stop_threshold = j.value("stop_threshold", o.stop_threshold);
  o.stop_at_target = j.value("stop_at_target", o.stop_at_target);
  o.noise_sigma = j.value("noise_sigma", o.noise_sigma);
  o.n = j.value("n", o.n);
  o.markers = j.value("markers", o.markers);
  o.rng_seed = j.value("rng_seed", o.rng_seed);
  o.predict_motion = j.value("predict_motion", o.predict_motion);
  o.max_invocations = j.value("max_invocations", o.max_invocations);
  if (j.contains("backend")) o.backend = harness::parse_sim_backend(j.at("backend").get<std::string>());
  return o;
}

void fill(snail_localize_result* out, const geometry::Pose& p, int its, bool conv, double err) {
  out->pose = to_c(p);
  out->iterations = its;
  out->converged = conv ? 1 : 0;
  out->squared_error = err;
}

}  // namespace

extern "C" {

const char* snail_last_error(void) { return g_error.c_str(); }

const char* snail_status_name(int status) {
  switch (status) {
    case SNAIL_OK: return "ok";
    case SNAIL_E_ARGUMENT: return "invalid argument";
    case SNAIL_E_CONFIG: return "configuration error";
    case SNAIL_E_GEOMETRY: return "geometry error";
    case SNAIL_E_PROTOCOL: return "protocol error";
    case SNAIL_E_DIVERGED: return "diverged";
    case SNAIL_E_INTERNAL: return "internal error";
    default: return "unknown status";
  }
}

const char* snail_version(void) { return "0.1.0"; }

void snail_string_free(char* s) { std::free(s); }

int snail_config_create(const char* json, snail_config** out) {
  return guard([&] {
    if (!out) return fail(SNAIL_E_ARGUMENT, "out is null");
    auto c = std::make_unique<snail_config>();
    c->cfg = solver::config_from_json(parse_json(json));
    c->cfg.validate();
    *out = c.release();
    return SNAIL_OK;
  });
}

int snail_config_to_json(const snail_config* cfg, char** out) {
  return guard([&] {
    if (!cfg || !out) return fail(SNAIL_E_ARGUMENT, "null argument");
    *out = dup(solver::to_json(cfg->cfg).dump());
    return SNAIL_OK;
  });
}

void snail_config_destroy(snail_config* cfg) { delete cfg; }

int snail_scene_generate(size_t n, double noise_sigma, uint64_t rng_seed, snail_scene** out) {
  return guard([&] {
    if (!out) return fail(SNAIL_E_ARGUMENT, "out is null");
    *out = new snail_scene{harness::gen_scene(n, noise_sigma, rng_seed)};
    return SNAIL_OK;
  });
}

int snail_scene_from_json(const char* json, snail_scene** out) {
  return guard([&] {
    if (!json || !out) return fail(SNAIL_E_ARGUMENT, "null argument");
    const auto j = nlohmann::json::parse(json, nullptr, false);
    if (j.is_discarded()) return fail(SNAIL_E_GEOMETRY, "scene is not valid JSON");
    *out = new snail_scene{harness::scene_from_json(j)};
    return SNAIL_OK;
  });
}

int snail_scene_from_csv(const char* path, snail_scene** out) {
  return guard([&] {
    if (!path || !out) return fail(SNAIL_E_ARGUMENT, "null argument");
    harness::SyntheticScene s;
    s.correspondences = harness::load_matches_csv(path);
    *out = new snail_scene{std::move(s)};
    return SNAIL_OK;
  });
}

int snail_scene_to_json(const snail_scene* s, char** out) {
  return guard([&] {
    if (!s || !out) return fail(SNAIL_E_ARGUMENT, "null argument");
    *out = dup(harness::scene_to_json(s->scene).dump(2));
    return SNAIL_OK;
  });
}

size_t snail_scene_size(const snail_scene* s) { return s ? s->scene.correspondences.size() : 0; }

int snail_scene_ground_truth(const snail_scene* s, snail_pose* out) {
  if (!s || !out) return fail(SNAIL_E_ARGUMENT, "null argument");
  *out = to_c(s->scene.ground_truth);
  return SNAIL_OK;
}

int snail_scene_intrinsics(const snail_scene* s, snail_intrinsics* out) {
  if (!s || !out) return fail(SNAIL_E_ARGUMENT, "null argument");
  const auto& k = s->scene.intrinsics;
  *out = {k.fx, k.fy, k.cx, k.cy};
  return SNAIL_OK;
}

int snail_scene_perturbed_start(const snail_scene* s, double rot, double trans, snail_pose* out) {
  return guard([&] {
    if (!s || !out) return fail(SNAIL_E_ARGUMENT, "null argument");
    *out = to_c(harness::perturbed_start(s->scene, rot, trans));
    return SNAIL_OK;
  });
}

void snail_scene_destroy(snail_scene* s) { delete s; }

int snail_localize(const snail_scene* s, const snail_config* cfg, const snail_pose* x0, snail_localize_result* out) {
  return guard([&] {
    if (!s || !x0 || !out) return fail(SNAIL_E_ARGUMENT, "null argument");
    const solver::SolverConfig c = cfg ? cfg->cfg : solver::SolverConfig{};
    const auto r = solver::plaintext_localize(s->scene.correspondences, s->scene.intrinsics, from_c(*x0), c);
    fill(out, r.pose, r.iterations, r.converged, r.squared_error);
    return SNAIL_OK;
  });
}

int snail_sil_localize(const snail_scene* s, const snail_config* cfg, const snail_pose* x0,
                       snail_localize_result* out) {
  return guard([&] {
    if (!s || !x0 || !out) return fail(SNAIL_E_ARGUMENT, "null argument");
    const solver::SolverConfig c = cfg ? cfg->cfg : solver::SolverConfig{};
    const auto r = solver::sil_localize(s->scene.correspondences, s->scene.intrinsics, from_c(*x0), c);
    fill(out, r.pose, r.invocations, r.converged, r.steps.empty() ? 0 : r.steps.back().squared_error);
    return SNAIL_OK;
  });
}

int snail_session_open_local(const char* params_json, snail_session** out) {
  return guard([&] {
    if (!out) return fail(SNAIL_E_ARGUMENT, "out is null");
    auto s = std::make_unique<snail_session>();
    s->params = protocol::SessionParams::from_json(parse_json(params_json));
    s->local = std::make_unique<protocol::LocalSession>(s->params);
    *out = s.release();
    return SNAIL_OK;
  });
}

int snail_session_open_remote(const char* generator_addr, const char* evaluator_addr, const char* params_json,
                              snail_session** out) {
  return guard([&] {
    if (!generator_addr || !evaluator_addr || !out) return fail(SNAIL_E_ARGUMENT, "null argument");
    auto s = std::make_unique<snail_session>();
    s->params = protocol::SessionParams::from_json(parse_json(params_json));
    protocol::MapWordsFn words;
    if (s->params.mode == protocol::Mode::kSplit)
      words = [mu = s->map_mu, w = s->map_words](uint64_t) {
        std::lock_guard lk(*mu);
        return *w;
      };
    s->remote = std::make_unique<protocol::RemoteSession>(generator_addr, evaluator_addr, s->params, words);
    *out = s.release();
    return SNAIL_OK;
  });
}

int snail_session_step(snail_session* s, const snail_scene* scene, const snail_pose* x, snail_step* out,
                       snail_comm* comm) {
  return guard([&] {
    if (!s || !scene || !x || !out) return fail(SNAIL_E_ARGUMENT, "null argument");
    const auto& c = scene->scene.correspondences;
    s->set_map(c);
    protocol::InvocationResult raw;
    const auto r = s->local ? s->local->invoke(c, from_c(*x), &raw) : s->client().invoke(c, from_c(*x), &raw);
    out->pose = to_c(r.pose);
    out->squared_error = r.squared_error;
    out->overflow = r.overflow ? 1 : 0;
    if (comm) *comm = to_c(raw.comm);
    return SNAIL_OK;
  });
}

int snail_session_localize(snail_session* s, const snail_scene* scene, const snail_pose* x0,
                           snail_localize_result* out) {
  return guard([&] {
    if (!s || !scene || !x0 || !out) return fail(SNAIL_E_ARGUMENT, "null argument");
    const auto& c = scene->scene.correspondences;
    s->set_map(c);
    const auto r = s->client().localize(c, from_c(*x0));
    fill(out, r.pose, r.invocations, r.converged, r.steps.empty() ? 0 : r.steps.back().squared_error);
    return SNAIL_OK;
  });
}

int snail_session_totals(const snail_session* s, snail_comm* out) {
  if (!s || !out) return fail(SNAIL_E_ARGUMENT, "null argument");
  *out = to_c(const_cast<snail_session*>(s)->client().totals());
  return SNAIL_OK;
}

uint64_t snail_session_invocations(const snail_session* s) {
  return s ? const_cast<snail_session*>(s)->client().invocations() : 0;
}

int snail_session_close(snail_session* s) {
  return guard([&] {
    if (!s) return fail(SNAIL_E_ARGUMENT, "null argument");
    if (s->local)
      s->local->close();
    else
      s->remote->close();
    return SNAIL_OK;
  });
}

void snail_session_destroy(snail_session* s) {
  if (!s) return;
  try {
    if (s->local) s->local->close();
    if (s->remote) s->remote->close();
  } catch (...) {
  }
  delete s;
}

int snail_server_create(const char* role, const char* listen, snail_log_fn log, void* user, snail_server** out) {
  return guard([&] {
    if (!role || !listen || !out) return fail(SNAIL_E_ARGUMENT, "null argument");
    const protocol::Role r = protocol::parse_role(role);
    if (r != protocol::Role::kGenerator && r != protocol::Role::kEvaluator)
      return fail(SNAIL_E_CONFIG, std::string("a server is a generator or an evaluator, not ") + role);
    protocol::Server::Logger logger;
    if (log) logger = [log, user](const std::string& line) { log(line.c_str(), user); };
    *out = new snail_server{std::make_unique<protocol::Server>(r, listen, logger)};
    return SNAIL_OK;
  });
}

uint16_t snail_server_port(const snail_server* s) { return s ? s->server->port() : 0; }

int snail_server_run(snail_server* s) {
  return guard([&] {
    if (!s) return fail(SNAIL_E_ARGUMENT, "null argument");
    s->server->run();
    return SNAIL_OK;
  });
}

int snail_server_start(snail_server* s) {
  return guard([&] {
    if (!s) return fail(SNAIL_E_ARGUMENT, "null argument");
    s->server->start();
    return SNAIL_OK;
  });
}

int snail_server_stop(snail_server* s) {
  return guard([&] {
    if (!s) return fail(SNAIL_E_ARGUMENT, "null argument");
    s->server->stop();
    return SNAIL_OK;
  });
}

void snail_server_destroy(snail_server* s) { delete s; }

int snail_privacy_bound(uint64_t o, uint64_t c, double* bound, int* insufficient_stream) {
  return guard([&] {
    const auto b = protocol::privacy_bound(o, c);
    if (bound) *bound = b.bound;
    if (insufficient_stream) *insufficient_stream = b.insufficient_stream ? 1 : 0;
    return SNAIL_OK;
  });
}

int snail_bench(const char* config_json, char** csv) {
  return guard([&] {
    if (!csv) return fail(SNAIL_E_ARGUMENT, "csv is null");
    std::vector<harness::BenchConfig> configs;
    harness::BenchOptions opts;
    harness::bench_from_json(parse_json(config_json), configs, opts);
    *csv = dup(harness::bench_csv(harness::bench(configs, opts)));
    return SNAIL_OK;
  });
}

int snail_sim(const char* options_json, char** csv, char** summary_json) {
  return guard([&] {
    if (!csv) return fail(SNAIL_E_ARGUMENT, "csv is null");
    const auto run = harness::snail_sim(sim_options(parse_json(options_json)));
    if (summary_json) {
      nlohmann::json j = {{"frames", run.frames.size()},
                          {"movement_steps", run.movement_steps},
                          {"reached_target", run.reached_target},
                          {"total_invocations", run.total_invocations},
                          {"median_invocations_after_first", run.median_invocations_after_first},
                          {"sil_gates_per_invocation", run.sil_gates_per_invocation},
                          {"do_gates_per_frame", run.do_gates_per_frame},
                          {"gate_ratio", run.gate_ratio()},
                          {"privacy", run.privacy.describe()},
                          {"diagnostic", run.diagnostic}};
      *summary_json = dup(j.dump(2));
    }
    *csv = dup(harness::trajectory_csv(run));
    return SNAIL_OK;
  });
}

int snail_study(const char* study, size_t samples, uint64_t rng_seed, char** csv) {
  return guard([&] {
    if (!study || !csv) return fail(SNAIL_E_ARGUMENT, "null argument");
    const std::string which = study;
    if (which == "sweeps") {
      *csv = dup(harness::sweep_csv(harness::sweep_study(samples, rng_seed)));
    } else if (which == "formats") {
      *csv = dup(harness::formats_csv(harness::fixed_vs_float(samples, rng_seed)));
    } else {
      return fail(SNAIL_E_CONFIG, "unknown study '" + which + "' (sweeps or formats)");
    }
    return SNAIL_OK;
  });
}

}  // extern "C"
