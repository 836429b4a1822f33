#include <chrono>
#include <thread>

#include "catch_amalgamated.hpp"
#include "harness/scene.hpp"
#include "protocol/accounting.hpp"
#include "protocol/channel.hpp"
#include "protocol/messages.hpp"
#include "protocol/server.hpp"
#include "protocol/session.hpp"
#include "solver/solver.hpp"

using namespace snail;
using namespace snail::protocol;

namespace {

bool same_step(const solver::StepResult& a, const solver::StepResult& b) {
  for (int d = 0; d < 6; ++d)
    if (a.pose[d] != b.pose[d]) return false;
  return a.squared_error == b.squared_error && a.overflow == b.overflow;
}

}  // namespace

TEST_CASE("message framing") {
  const Message m{MsgType::kStepDone, {1, 0, 0, 0, 0, 0, 0, 0}};
  const auto bytes = encode_message(m);
  REQUIRE(bytes.size() == m.wire_bytes());
  REQUIRE(bytes.size() == 13);
  MsgType t;
  REQUIRE(parse_header(bytes.data(), t) == 8);
  REQUIRE(t == MsgType::kStepDone);
  REQUIRE(std::string(msg_name(MsgType::kGcStream)) == "GC_STREAM");
  const uint8_t bad[5] = {1, 0, 0, 0, 42};
  REQUIRE_THROWS_AS(parse_header(bad, t), ProtocolError);
  const uint8_t empty[5] = {0, 0, 0, 0, 0};
  REQUIRE_THROWS_AS(parse_header(empty, t), ProtocolError);
}

TEST_CASE("hello and session parameters") {
  const Hello h{Role::kMapOwner, 0x1122334455667788ull};
  const auto hp = h.to_payload();
  REQUIRE(hp.size() == 9);
  const Hello h2 = Hello::from_payload(hp);
  REQUIRE(h2.role == Role::kMapOwner);
  REQUIRE(h2.session_id == h.session_id);
  REQUIRE(parse_role("evaluator") == Role::kEvaluator);
  REQUIRE_THROWS_AS(parse_role("observer"), ProtocolError);

  SessionParams p;
  p.session_id = 42;
  p.n = 8;
  p.encoding = InputEncoding::kNaive;
  p.cfg.lambda = 2e-3;
  const SessionParams q = SessionParams::from_payload(p.to_payload());
  REQUIRE(q.session_id == 42);
  REQUIRE(q.n == 8);
  REQUIRE(q.encoding == InputEncoding::kNaive);
  REQUIRE(q.cfg == p.cfg);
  REQUIRE(q.digest() == p.digest());
  SessionParams r = p;
  r.n = 9;
  REQUIRE_FALSE(r.digest() == p.digest());

  SessionParams bad;
  bad.n = 5;
  REQUIRE_THROWS_AS(bad.validate(), ProtocolError);
  bad = {};
  bad.mode = Mode::kSplit;  // the map owner's inputs cannot come from the client's seed
  REQUIRE_THROWS_AS(bad.validate(), ProtocolError);
  const std::string junk = "not json";
  REQUIRE_THROWS_AS(SessionParams::from_payload(std::span<const uint8_t>(
                        reinterpret_cast<const uint8_t*>(junk.data()), junk.size())),
                    ProtocolError);
}

TEST_CASE("client input-encoding accounting at n = 6") {
  const size_t bits = 6 * 5 * 32;  // correspondence words only
  REQUIRE(bits == 960);
  std::vector<uint8_t> x(bits, 1);
  const auto seed = gc::GarbleSeed::random();
  const auto naive = client_encode_naive(x, label_pairs(gc::LabelDeriver(seed), 0, bits));
  REQUIRE(naive.report.client_rx_bits == 245760);
  REQUIRE(naive.report.client_tx_bits == 122880);
  const auto seeded = client_encode_seeded(x, seed);
  REQUIRE(seeded.report.client_rx_bits == 256);
  REQUIRE(seeded.report.client_tx_bits == 122880);
  REQUIRE(seeded.labels == naive.labels);
  REQUIRE_THROWS_AS(client_encode_naive(x, label_pairs(gc::LabelDeriver(seed), 0, 10)), ProtocolError);
}

TEST_CASE("privacy bound") {
  const auto b = privacy_bound(100, 20);
  REQUIRE_FALSE(b.insufficient_stream);
  REQUIRE(b.bound == Catch::Approx(1.0 / 95));
  REQUIRE(privacy_bound(20, 20).insufficient_stream);
  REQUIRE(privacy_bound(1, 20).insufficient_stream);
  REQUIRE_FALSE(privacy_bound(21, 20).insufficient_stream);
  REQUIRE_THROWS_AS(privacy_bound(100, 1), ProtocolError);
  REQUIRE(b.describe().find("95") != std::string::npos);
}

TEST_CASE("memory links deliver in order, record and close") {
  auto [a, b] = memory_link();
  a->set_recording(true);
  a->send({MsgType::kHello, {1, 2}});
  a->send({MsgType::kBye, {}});
  REQUIRE(b->recv().type == MsgType::kHello);
  REQUIRE_THROWS_AS(b->recv(MsgType::kHello), ProtocolError);
  REQUIRE(a->bytes_sent() == 7 + 5);
  REQUIRE(b->bytes_received() == 12);
  const auto tr = a->take_transcript();
  REQUIRE(tr.size() == 2);
  REQUIRE(tr[0] == TranscriptEntry{MsgType::kHello, 7, true});
  a->close();
  REQUIRE_THROWS_AS(b->recv(), ProtocolError);

  MemoryLinkOptions slow;
  slow.latency = std::chrono::milliseconds(30);
  auto [c, d] = memory_link(slow);
  const auto t0 = std::chrono::steady_clock::now();
  c->send({MsgType::kBye, {}});
  d->recv();
  REQUIRE(std::chrono::steady_clock::now() - t0 >= std::chrono::milliseconds(30));
}

TEST_CASE("tcp channels") {
  TcpListener l("127.0.0.1:0");
  REQUIRE(l.port() != 0);
  std::thread t([&] {
    auto s = l.accept();
    auto m = s->recv();
    m.payload.push_back(9);
    s->send(std::move(m));
  });
  auto c = tcp_connect("127.0.0.1:" + std::to_string(l.port()));
  std::vector<uint8_t> big(200000, 7);
  c->send({MsgType::kGcStream, big});
  const auto back = c->recv(MsgType::kGcStream);
  t.join();
  REQUIRE(back.payload.size() == big.size() + 1);
  REQUIRE(back.payload.back() == 9);
  REQUIRE_THROWS_AS(tcp_connect("127.0.0.1:1", std::chrono::milliseconds(200)), ProtocolError);
  REQUIRE_THROWS_AS(tcp_connect("no-port"), ProtocolError);
}

TEST_CASE("offload sessions reproduce the cleartext step") {
  const auto sc = harness::gen_scene(6, 0, 3);
  const auto x0 = harness::perturbed_start(sc);
  SessionParams p;
  p.session_id = 1;
  p.k = sc.intrinsics;

  SECTION("seeded encoding, two invocations, identical server views") {
    LocalSession ls(p);
    InvocationResult raw;
    const auto s1 = ls.invoke(sc.correspondences, x0, &raw);
    REQUIRE(same_step(s1, solver::sil_step(sc.correspondences, sc.intrinsics, x0, p.cfg)));
    REQUIRE(raw.comm.rounds == 2);
    REQUIRE(raw.input_encoding.client_rx_bits == 256);
    REQUIRE(raw.input_encoding.client_tx_bits == 128 * 36 * 32);
    const auto other = harness::gen_scene(6, 0, 99);
    const auto s2 = ls.invoke(other.correspondences, other.ground_truth);
    REQUIRE(same_step(s2, solver::sil_step(other.correspondences, other.intrinsics, other.ground_truth, p.cfg)));
    ls.close();
    // BYE is the only traffic outside the invocations.
    REQUIRE(ls.generator_to_evaluator_bytes() == 2 * ls.client().spec().server_tx_bytes() + kMsgHeaderBytes);
    const auto tr = ls.server_transcripts();
    REQUIRE(tr.size() == 2);
    REQUIRE(tr[0] == tr[1]);
    const auto pb = ls.privacy();
    REQUIRE(pb.o == 2);
    REQUIRE(pb.insufficient_stream);
  }
  SECTION("naive encoding ships both labels of every client bit") {
    p.encoding = InputEncoding::kNaive;
    LocalSession ls(p);
    InvocationResult raw;
    const auto s = ls.invoke(sc.correspondences, x0, &raw);
    REQUIRE(same_step(s, solver::sil_step(sc.correspondences, sc.intrinsics, x0, p.cfg)));
    REQUIRE(raw.input_encoding.client_rx_bits == 256 * 36 * 32);
    REQUIRE(raw.comm.client_rx_bits > raw.input_encoding.client_rx_bits);
    ls.close();
  }
}

TEST_CASE("split sessions take map inputs from the map owner by OT") {
  const auto sc = harness::gen_scene(6, 0, 4);
  const auto x0 = harness::perturbed_start(sc);
  SessionParams p;
  p.session_id = 2;
  p.mode = Mode::kSplit;
  p.encoding = InputEncoding::kNaive;
  LocalSession ls(p);
  InvocationResult raw;
  const auto s = ls.invoke(sc.correspondences, x0, &raw);
  REQUIRE(same_step(s, solver::sil_step(sc.correspondences, sc.intrinsics, x0, p.cfg)));
  // The client supplies only image points and the pose.
  REQUIRE(raw.input_encoding.client_tx_bits == 128 * (6 * 2 + 6) * 32);
  ls.close();
}

TEST_CASE("generator and evaluator over tcp") {
  Server gen(Role::kGenerator, "127.0.0.1:0");
  Server eval(Role::kEvaluator, "127.0.0.1:0");
  gen.start();
  eval.start();
  const auto sc = harness::gen_scene(6, 0, 5);
  const auto x0 = harness::perturbed_start(sc);
  SessionParams p;
  p.session_id = 3;
  {
    RemoteSession rs("127.0.0.1:" + std::to_string(gen.port()), "127.0.0.1:" + std::to_string(eval.port()), p);
    const auto s = rs.client().invoke(sc.correspondences, x0);
    REQUIRE(same_step(s, solver::sil_step(sc.correspondences, sc.intrinsics, x0, p.cfg)));
    rs.close();
  }
  for (int i = 0; i < 100 && (gen.sessions_completed() < 1 || eval.sessions_completed() < 1); ++i)
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  REQUIRE(gen.sessions_completed() == 1);
  REQUIRE(eval.sessions_completed() == 1);
  gen.stop();
  eval.stop();
}
