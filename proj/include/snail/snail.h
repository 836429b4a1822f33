#ifndef SNAIL_SNAIL_H
#define SNAIL_SNAIL_H

#include <stddef.h>
#include <stdint.h>

#if defined(SNAIL_BUILDING_LIBRARY)
#define SNAIL_API __attribute__((visibility("default")))
#else
#define SNAIL_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum snail_status {
  SNAIL_OK = 0,
  SNAIL_E_ARGUMENT = 1,   /* null pointer, bad size */
  SNAIL_E_CONFIG = 2,     /* solver, bench or session configuration rejected */
  SNAIL_E_GEOMETRY = 3,   /* invalid pose, intrinsics or correspondences */
  SNAIL_E_PROTOCOL = 4,   /* malformed or unexpected message, socket or peer failure */
  SNAIL_E_DIVERGED = 5,   /* solver did not converge */
  SNAIL_E_INTERNAL = 6
} snail_status;

/* Message of the last failure on the calling thread; empty after success. */
SNAIL_API const char* snail_last_error(void);
SNAIL_API const char* snail_status_name(int status);
SNAIL_API const char* snail_version(void);

/* Strings returned through char** are owned by the caller. */
SNAIL_API void snail_string_free(char* s);

typedef struct snail_pose {
  double rx, ry, rz; /* Euler angles, R = Rz Ry Rx */
  double tx, ty, tz;
} snail_pose;

typedef struct snail_intrinsics {
  double fx, fy, cx, cy;
} snail_intrinsics;

typedef struct snail_step {
  snail_pose pose;       /* pose after the update */
  double squared_error;  /* error at the pose the step started from */
  int overflow;
} snail_step;

typedef struct snail_comm {
  uint64_t client_tx_bits;
  uint64_t client_rx_bits;
  uint64_t server_tx_bits;
  uint64_t rounds;
} snail_comm;

/* ---- solver configuration ---- */

typedef struct snail_config snail_config;

/* NULL or "" gives the defaults. Keys: algorithm, lambda, convergence_c,
   epsilon, max_outer, svd_sweeps, format. */
SNAIL_API int snail_config_create(const char* json, snail_config** out);
SNAIL_API int snail_config_to_json(const snail_config* cfg, char** out);
SNAIL_API void snail_config_destroy(snail_config* cfg);

/* ---- scenes ---- */

typedef struct snail_scene snail_scene;

SNAIL_API int snail_scene_generate(size_t n, double noise_sigma, uint64_t rng_seed, snail_scene** out);
SNAIL_API int snail_scene_from_json(const char* json, snail_scene** out);
/* CSV of 2D-3D matches with header u,v,x,y,z; default intrinsics. */
SNAIL_API int snail_scene_from_csv(const char* path, snail_scene** out);
SNAIL_API int snail_scene_to_json(const snail_scene* s, char** out);
SNAIL_API size_t snail_scene_size(const snail_scene* s);
SNAIL_API int snail_scene_ground_truth(const snail_scene* s, snail_pose* out);
SNAIL_API int snail_scene_intrinsics(const snail_scene* s, snail_intrinsics* out);
/* Ground truth perturbed by up to rot rad / trans units per component. */
SNAIL_API int snail_scene_perturbed_start(const snail_scene* s, double rot, double trans, snail_pose* out);
SNAIL_API void snail_scene_destroy(snail_scene* s);

/* ---- localization in the clear ---- */

typedef struct snail_localize_result {
  snail_pose pose;
  int iterations; /* solver iterations, or invocations for the chained form */
  int converged;
  double squared_error;
} snail_localize_result;

/* Plaintext reference with a data-dependent loop. */
SNAIL_API int snail_localize(const snail_scene* s, const snail_config* cfg, const snail_pose* x0,
                             snail_localize_result* out);
/* Chained single iterations on the cleartext backend. */
SNAIL_API int snail_sil_localize(const snail_scene* s, const snail_config* cfg, const snail_pose* x0,
                                 snail_localize_result* out);

/* ---- sessions ---- */

typedef struct snail_session snail_session;

/* Session parameters as JSON: session_id, n, intrinsics, solver, mode
   ("offload" | "split"), encoding ("seeded" | "naive"). */
SNAIL_API int snail_session_open_local(const char* params_json, snail_session** out);
SNAIL_API int snail_session_open_remote(const char* generator_addr, const char* evaluator_addr,
                                        const char* params_json, snail_session** out);
/* One garbled iteration on the scene's correspondences at pose x. */
SNAIL_API int snail_session_step(snail_session* s, const snail_scene* scene, const snail_pose* x, snail_step* out,
                                 snail_comm* comm);
/* Chained steps until convergence or max_outer. */
SNAIL_API int snail_session_localize(snail_session* s, const snail_scene* scene, const snail_pose* x0,
                                     snail_localize_result* out);
SNAIL_API int snail_session_totals(const snail_session* s, snail_comm* out);
SNAIL_API uint64_t snail_session_invocations(const snail_session* s);
/* Sends BYE and waits for the servers of a local session. */
SNAIL_API int snail_session_close(snail_session* s);
SNAIL_API void snail_session_destroy(snail_session* s);

/* ---- servers ---- */

typedef struct snail_server snail_server;
typedef void (*snail_log_fn)(const char* line, void* user);

/* role: "generator" or "evaluator"; listen: "host:port", port 0 picks one. */
SNAIL_API int snail_server_create(const char* role, const char* listen, snail_log_fn log, void* user,
                                  snail_server** out);
SNAIL_API uint16_t snail_server_port(const snail_server* s);
/* Blocks until snail_server_stop. */
SNAIL_API int snail_server_run(snail_server* s);
SNAIL_API int snail_server_start(snail_server* s);
SNAIL_API int snail_server_stop(snail_server* s);
SNAIL_API void snail_server_destroy(snail_server* s);

/* ---- accounting and harness ---- */

SNAIL_API int snail_privacy_bound(uint64_t o, uint64_t c, double* bound, int* insufficient_stream);

/* Bench config JSON: {"rows": [{algorithm, n, format, mode}], scenes, rng_seed,
   noise_sigma, solver}. Writes the CSV table. */
SNAIL_API int snail_bench(const char* config_json, char** csv);

/* Simulator options JSON: target[6], start[6] (or approach distance),
   frames, gain, max_step, max_rot_step, stop_threshold, stop_at_target,
   noise_sigma, n, markers, rng_seed, predict_motion, backend, solver.
   Writes the per-frame CSV and a JSON summary. */
SNAIL_API int snail_sim(const char* options_json, char** csv, char** summary_json);

/* study: "sweeps" or "formats". */
SNAIL_API int snail_study(const char* study, size_t samples, uint64_t rng_seed, char** csv);

#ifdef __cplusplus
}
#endif

#endif
