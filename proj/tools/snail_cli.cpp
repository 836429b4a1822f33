#include <atomic>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "snail/snail.h"

namespace {

struct Failure {
  int code;
};

void check(int rc) {
  if (rc != SNAIL_OK) {
    std::fprintf(stderr, "snail: %s: %s\n", snail_status_name(rc), snail_last_error());
    throw Failure{rc};
  }
}

std::string take(char* s) {
  std::string out = s ? s : "";
  snail_string_free(s);
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    std::fprintf(stderr, "snail: cannot open %s\n", path.c_str());
    throw Failure{2};
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_out(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::fwrite(text.data(), 1, text.size(), stdout);
    return;
  }
  std::ofstream out(path);
  out << text;
  if (!out) {
    std::fprintf(stderr, "snail: cannot write %s\n", path.c_str());
    throw Failure{2};
  }
}

// "rx,ry,rz,tx,ty,tz"
nlohmann::json parse_pose(const std::string& s) {
  nlohmann::json j = nlohmann::json::array();
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) j.push_back(std::stod(item));
  if (j.size() != 6) throw CLI::ValidationError("pose", "expected 6 comma-separated numbers");
  return j;
}

std::atomic<snail_server*> g_server{nullptr};

void on_signal(int) {
  if (auto* s = g_server.load()) snail_server_stop(s);
}

void log_line(const char* line, void*) { std::fprintf(stderr, "%s\n", line); }

void print_pose(const char* label, const snail_pose& p) {
  std::printf("%s %.9g %.9g %.9g %.9g %.9g %.9g\n", label, p.rx, p.ry, p.rz, p.tx, p.ty, p.tz);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"snail: PnP localization under two-party garbled circuits"};
  app.require_subcommand(1);

  // serve
  std::string role, listen = "127.0.0.1:7000";
  auto* serve = app.add_subcommand("serve", "run a generator or evaluator");
  serve->add_option("--role", role, "generator | evaluator")->required();
  serve->add_option("--listen", listen, "host:port");

  // client
  std::string gen_addr, eval_addr, scene_path, csv_path, mode = "offload", encoding = "seeded", solver_json;
  size_t n = 6;
  double noise = 0;
  uint64_t seed = 1, session_id = 1;
  bool local = false;
  auto* client = app.add_subcommand("client", "localize one scene through a garbled session");
  client->add_option("--generator", gen_addr, "generator host:port");
  client->add_option("--evaluator", eval_addr, "evaluator host:port");
  client->add_flag("--local", local, "run both servers in this process");
  client->add_option("--scene", scene_path, "scene JSON");
  client->add_option("--matches", csv_path, "CSV of 2D-3D matches (u,v,x,y,z)");
  client->add_option("--n", n, "points for a generated scene");
  client->add_option("--noise", noise, "pixel noise for a generated scene");
  client->add_option("--seed", seed, "seed for a generated scene");
  client->add_option("--mode", mode, "offload | split");
  client->add_option("--encoding", encoding, "seeded | naive");
  client->add_option("--session-id", session_id);
  client->add_option("--solver", solver_json, "solver config JSON");

  // scene
  std::string scene_out;
  auto* scene = app.add_subcommand("scene", "generate a synthetic scene as JSON");
  scene->add_option("--n", n);
  scene->add_option("--noise", noise);
  scene->add_option("--seed", seed);
  scene->add_option("--out", scene_out);

  // bench
  std::string bench_config, bench_out;
  auto* bench = app.add_subcommand("bench", "gate, byte and round table");
  bench->add_option("--config", bench_config, "bench JSON")->required();
  bench->add_option("--out", bench_out, "CSV path, - for stdout");

  // sim
  std::string target = "0,0,0,0,0,0", start, sim_out, backend = "cleartext";
  int frames = 50;
  double approach = 2.0;
  bool no_predict = false, keep_going = false;
  auto* sim = app.add_subcommand("sim", "visual-servoing simulator");
  sim->add_option("--target", target, "target pose rx,ry,rz,tx,ty,tz");
  sim->add_option("--start", start, "start pose; default: behind the target");
  sim->add_option("--approach", approach, "start distance behind the target");
  sim->add_option("--frames", frames);
  sim->add_option("--noise", noise);
  sim->add_option("--seed", seed);
  sim->add_option("--backend", backend, "cleartext | gc");
  sim->add_flag("--no-predict", no_predict, "warm start from the previous estimate only");
  sim->add_flag("--keep-going", keep_going, "run all frames even once at the target");
  sim->add_option("--out", sim_out, "per-frame CSV");

  // study
  std::string which, study_out;
  size_t samples = 0;
  auto* study = app.add_subcommand("study", "SVD sweep sufficiency or fixed vs float");
  study->add_option("which", which, "sweeps | formats")->required()->check(CLI::IsMember({"sweeps", "formats"}));
  study->add_option("--samples", samples, "default 10000 (sweeps) or 300 (formats)");
  study->add_option("--seed", seed);
  study->add_option("--out", study_out);

  // privacy
  uint64_t o = 0, c = 20;
  auto* privacy = app.add_subcommand("privacy", "privacy bound for a stream of invocations");
  privacy->add_option("-o", o, "invocations")->required();
  privacy->add_option("-c", c, "maximum iterations per image");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve) {
      snail_server* s = nullptr;
      check(snail_server_create(role.c_str(), listen.c_str(), log_line, nullptr, &s));
      g_server = s;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::fprintf(stderr, "%s listening on port %u\n", role.c_str(), snail_server_port(s));
      const int rc = snail_server_run(s);
      g_server = nullptr;
      snail_server_destroy(s);
      check(rc);
    } else if (*client) {
      snail_scene* sc = nullptr;
      if (!scene_path.empty())
        check(snail_scene_from_json(read_file(scene_path).c_str(), &sc));
      else if (!csv_path.empty())
        check(snail_scene_from_csv(csv_path.c_str(), &sc));
      else
        check(snail_scene_generate(n, noise, seed, &sc));
      nlohmann::json params = {{"session_id", session_id},
                               {"n", snail_scene_size(sc)},
                               {"mode", mode},
                               {"encoding", encoding}};
      snail_intrinsics k;
      check(snail_scene_intrinsics(sc, &k));
      params["intrinsics"] = {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy}};
      if (!solver_json.empty()) params["solver"] = nlohmann::json::parse(solver_json);
      snail_session* sess = nullptr;
      if (local)
        check(snail_session_open_local(params.dump().c_str(), &sess));
      else if (!gen_addr.empty() && !eval_addr.empty())
        check(snail_session_open_remote(gen_addr.c_str(), eval_addr.c_str(), params.dump().c_str(), &sess));
      else
        throw CLI::ValidationError("client", "give --local or both --generator and --evaluator");
      snail_pose x0;
      check(snail_scene_perturbed_start(sc, 0.05, 0.1, &x0));
      snail_localize_result r;
      const int rc = snail_session_localize(sess, sc, &x0, &r);
      snail_comm tot{};
      if (rc == SNAIL_OK) snail_session_totals(sess, &tot);
      const int rc_close = snail_session_close(sess);
      snail_session_destroy(sess);
      check(rc);
      check(rc_close);
      print_pose("start", x0);
      print_pose("pose", r.pose);
      std::printf("invocations %d converged %d squared_error %.6g\n", r.iterations, r.converged, r.squared_error);
      std::printf("client_tx_bits %llu client_rx_bits %llu server_tx_bits %llu rounds %llu\n",
                  static_cast<unsigned long long>(tot.client_tx_bits),
                  static_cast<unsigned long long>(tot.client_rx_bits),
                  static_cast<unsigned long long>(tot.server_tx_bits), static_cast<unsigned long long>(tot.rounds));
      snail_scene_destroy(sc);
    } else if (*scene) {
      snail_scene* sc = nullptr;
      check(snail_scene_generate(n, noise, seed, &sc));
      char* text = nullptr;
      const int rc = snail_scene_to_json(sc, &text);
      snail_scene_destroy(sc);
      check(rc);
      write_out(scene_out, take(text) + "\n");
    } else if (*bench) {
      char* csv = nullptr;
      check(snail_bench(read_file(bench_config).c_str(), &csv));
      write_out(bench_out, take(csv));
    } else if (*sim) {
      nlohmann::json opts = {{"target", parse_pose(target)},
                             {"frames", frames},
                             {"noise_sigma", noise},
                             {"rng_seed", seed},
                             {"backend", backend},
                             {"predict_motion", !no_predict},
                             {"stop_at_target", !keep_going},
                             {"approach", approach}};
      if (!start.empty()) opts["start"] = parse_pose(start);
      char *csv = nullptr, *summary = nullptr;
      check(snail_sim(opts.dump().c_str(), &csv, &summary));
      const std::string table = take(csv);
      if (!sim_out.empty()) write_out(sim_out, table);
      std::printf("%s\n", take(summary).c_str());
    } else if (*study) {
      if (!samples) samples = which == "sweeps" ? 10000 : 300;
      char* csv = nullptr;
      check(snail_study(which.c_str(), samples, seed, &csv));
      write_out(study_out, take(csv));
    } else if (*privacy) {
      double b = 0;
      int insufficient = 0;
      check(snail_privacy_bound(o, c, &b, &insufficient));
      if (insufficient)
        std::printf("insufficient stream: o = %llu <= c = %llu\n", static_cast<unsigned long long>(o),
                    static_cast<unsigned long long>(c));
      else
        std::printf("%.9g\n", b);
    }
  } catch (const Failure& f) {
    return f.code;
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "snail: %s\n", e.what());
    return 1;
  }
  return 0;
}
