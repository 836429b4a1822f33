#include <cstring>
#include <string>

#include "catch_amalgamated.hpp"
#include "snail/snail.h"

namespace {

std::string take(char* s) {
  std::string r = s ? s : "";
  snail_string_free(s);
  return r;
}

}  // namespace

TEST_CASE("status names and errors") {
  REQUIRE(std::string(snail_status_name(SNAIL_OK)) == "ok");
  REQUIRE(std::string(snail_version()).size() > 0);
  snail_config* cfg = nullptr;
  REQUIRE(snail_config_create("{\"lamda\": 1}", &cfg) == SNAIL_E_CONFIG);
  REQUIRE(cfg == nullptr);
  REQUIRE(std::strlen(snail_last_error()) > 0);
  REQUIRE(snail_config_create("not json", &cfg) == SNAIL_E_CONFIG);
  REQUIRE(snail_config_create(nullptr, nullptr) == SNAIL_E_ARGUMENT);
  REQUIRE(snail_config_create("{}", &cfg) == SNAIL_OK);
  REQUIRE(std::string(snail_last_error()).empty());
  char* js = nullptr;
  REQUIRE(snail_config_to_json(cfg, &js) == SNAIL_OK);
  REQUIRE(take(js).find("\"LM\"") != std::string::npos);
  snail_config_destroy(cfg);
  snail_scene* s = nullptr;
  REQUIRE(snail_scene_generate(3, 0, 1, &s) == SNAIL_E_GEOMETRY);
  REQUIRE(snail_scene_from_csv("/nonexistent/matches.csv", &s) == SNAIL_E_GEOMETRY);
}

TEST_CASE("scenes and plaintext solves through the C interface") {
  snail_scene* s = nullptr;
  REQUIRE(snail_scene_generate(8, 0, 11, &s) == SNAIL_OK);
  REQUIRE(snail_scene_size(s) == 8);
  snail_pose truth, x0;
  REQUIRE(snail_scene_ground_truth(s, &truth) == SNAIL_OK);
  REQUIRE(snail_scene_perturbed_start(s, 0.05, 0.1, &x0) == SNAIL_OK);
  snail_intrinsics k;
  REQUIRE(snail_scene_intrinsics(s, &k) == SNAIL_OK);
  REQUIRE(k.fx == 500);

  snail_localize_result r;
  REQUIRE(snail_localize(s, nullptr, &x0, &r) == SNAIL_OK);
  REQUIRE(r.converged);
  REQUIRE(r.pose.tz == Catch::Approx(truth.tz).margin(1e-3));
  snail_localize_result c;
  REQUIRE(snail_sil_localize(s, nullptr, &x0, &c) == SNAIL_OK);
  REQUIRE(c.converged);
  REQUIRE(c.iterations == r.iterations);

  char* js = nullptr;
  REQUIRE(snail_scene_to_json(s, &js) == SNAIL_OK);
  const std::string text = take(js);
  snail_scene* back = nullptr;
  REQUIRE(snail_scene_from_json(text.c_str(), &back) == SNAIL_OK);
  REQUIRE(snail_scene_size(back) == 8);
  snail_scene_destroy(back);
  snail_scene_destroy(s);
}

TEST_CASE("a local offload session over the C interface") {
  snail_scene* s = nullptr;
  REQUIRE(snail_scene_generate(6, 0, 12, &s) == SNAIL_OK);
  snail_pose x0;
  REQUIRE(snail_scene_perturbed_start(s, 0.05, 0.1, &x0) == SNAIL_OK);
  snail_session* ss = nullptr;
  REQUIRE(snail_session_open_local("{\"n\": 7}", &ss) == SNAIL_OK);
  snail_step st;
  REQUIRE(snail_session_step(ss, s, &x0, &st, nullptr) != SNAIL_OK);
  snail_session_destroy(ss);

  REQUIRE(snail_session_open_local("{\"session_id\": 9}", &ss) == SNAIL_OK);
  snail_comm comm;
  REQUIRE(snail_session_step(ss, s, &x0, &st, &comm) == SNAIL_OK);
  REQUIRE(comm.rounds == 2);
  REQUIRE(snail_session_invocations(ss) == 1);
  REQUIRE_FALSE(st.overflow);
  REQUIRE(snail_session_close(ss) == SNAIL_OK);
  snail_session_destroy(ss);
  snail_scene_destroy(s);
}

TEST_CASE("privacy bound and studies") {
  double b = 0;
  int insufficient = 1;
  REQUIRE(snail_privacy_bound(100, 20, &b, &insufficient) == SNAIL_OK);
  REQUIRE(b == Catch::Approx(1.0 / 95));
  REQUIRE(insufficient == 0);
  REQUIRE(snail_privacy_bound(100, 1, &b, &insufficient) == SNAIL_E_PROTOCOL);
  char* csv = nullptr;
  REQUIRE(snail_study("sweeps", 10, 1, &csv) == SNAIL_E_CONFIG);
  REQUIRE(snail_study("nonsense", 1000, 1, &csv) == SNAIL_E_CONFIG);
  REQUIRE(snail_bench("{\"rows\": []}", &csv) == SNAIL_OK);
  REQUIRE(take(csv).rfind("algorithm,n,format,mode,", 0) == 0);
}

TEST_CASE("sim over the C interface") {
  char *csv = nullptr, *summary = nullptr;
  REQUIRE(snail_sim("{\"approach\": 0.5, \"frames\": 10}", &csv, &summary) == SNAIL_OK);
  REQUIRE(take(csv).rfind("frame,", 0) == 0);
  REQUIRE(take(summary).find("\"movement_steps\"") != std::string::npos);
  REQUIRE(snail_sim("{\"backend\": \"quantum\"}", &csv, &summary) == SNAIL_E_CONFIG);
}
