#include "protocol/session.hpp"

#include <algorithm>
#include <map>

#include "gc/garble.hpp"
#include "gc/ot.hpp"

namespace snail::protocol {

namespace {

std::vector<uint8_t> u64_payload(uint64_t v) {
  std::vector<uint8_t> out(8);
  for (int i = 0; i < 8; ++i) out[i] = static_cast<uint8_t>(v >> (8 * i));
  return out;
}

Message gc_message(const gc::Frame& f) { return {MsgType::kGcStream, gc::encode_frame(f)}; }

gc::Frame gc_frame(const Message& m) {
  if (m.type != MsgType::kGcStream) throw ProtocolError(std::string("expected GC_STREAM, got ") + msg_name(m.type));
  return gc::decode_frame(m.payload);
}

std::vector<uint8_t> pair_bytes(const std::vector<std::array<gc::Block, 2>>& pairs) {
  std::vector<uint8_t> out(pairs.size() * 32);
  for (size_t i = 0; i < pairs.size(); ++i) {
    pairs[i][0].to_bytes(out.data() + 32 * i);
    pairs[i][1].to_bytes(out.data() + 32 * i + 16);
  }
  return out;
}

std::vector<std::array<gc::Block, 2>> pairs_from_bytes(std::span<const uint8_t> b) {
  if (b.size() % 32) throw ProtocolError("label pair payload not a multiple of 32 bytes");
  std::vector<std::array<gc::Block, 2>> out(b.size() / 32);
  for (size_t i = 0; i < out.size(); ++i)
    out[i] = {gc::Block::from_bytes(b.data() + 32 * i), gc::Block::from_bytes(b.data() + 32 * i + 16)};
  return out;
}

std::vector<std::array<gc::Block, 2>> pairs_for(const gc::LabelDeriver& d, const std::vector<uint32_t>& bits) {
  std::vector<std::array<gc::Block, 2>> out(bits.size());
  for (size_t i = 0; i < bits.size(); ++i) {
    const gc::Block z = d.input_zero(bits[i]);
    out[i] = {z, z ^ d.delta()};
  }
  return out;
}

void check_digest(const Message& m, const SessionParams& p) {
  const auto d = p.digest();
  if (m.payload.size() != d.size() || !std::equal(d.begin(), d.end(), m.payload.begin()))
    throw ProtocolError("invocation requested with parameters other than the pinned ones");
}

void record(std::initializer_list<Channel*> links) {
  for (Channel* c : links)
    if (c) {
      c->set_recording(true);
      c->take_transcript();
    }
}

}  // namespace

std::vector<uint32_t> CircuitSpec::input_bits_of(InputOwner who) const {
  std::vector<uint32_t> out;
  uint32_t bit = 0;
  for (size_t w = 0; w < owners.size(); ++w) {
    const int width = circuit->slot_width[circuit->tape->inputs[w]];
    for (int i = 0; i < width; ++i, ++bit)
      if (owners[w] == who) out.push_back(bit);
  }
  return out;
}

uint64_t CircuitSpec::server_tx_bytes() const { return garbled_message_bytes(circuit->and_gates); }

CircuitSpec sil_circuit(const SessionParams& p) {
  static std::mutex mu;
  static std::map<std::string, std::shared_ptr<const gc::CompiledCircuit>> cache;
  const std::string key = std::to_string(p.n) + "|" + std::to_string(p.k.fx) + "," + std::to_string(p.k.fy) + "," +
                          std::to_string(p.k.cx) + "," + std::to_string(p.k.cy) + "|" + solver::to_json(p.cfg).dump();
  std::shared_ptr<const gc::CompiledCircuit> cc;
  {
    std::lock_guard lk(mu);
    auto it = cache.find(key);
    if (it != cache.end()) cc = it->second;
  }
  if (!cc) {
    auto built = std::make_shared<const gc::CompiledCircuit>(gc::compile(solver::cached_iteration_tape(p.n, p.k, p.cfg)));
    std::lock_guard lk(mu);
    cc = cache.emplace(key, built).first->second;
  }
  CircuitSpec s;
  s.circuit = cc;
  s.owners.assign(solver::iteration_input_count(p.n), InputOwner::kClient);
  if (p.mode == Mode::kSplit)
    for (size_t w = 0; w < 5 * p.n; ++w)
      if (w % 5 < 3) s.owners[w] = InputOwner::kMapOwner;
  return s;
}

std::vector<uint64_t> map_input_words(const geometry::CorrespondenceSet& c, obliv::NumericFormat fmt) {
  std::vector<uint64_t> v;
  for (const auto& m : c.map)
    for (double x : {m.x, m.y, m.z}) v.push_back(obliv::encode(x, fmt));
  return v;
}

// ---- client ----

ClientSession::ClientSession(SessionParams p, Channel& generator, Channel& evaluator, std::optional<CircuitSpec> spec)
    : p_(std::move(p)), gen_(generator), eval_(evaluator), spec_(spec ? *spec : sil_circuit(p_)) {
  p_.validate();
  client_bits_ = spec_.input_bits_of(InputOwner::kClient);
}

void ClientSession::open() {
  const Hello h{Role::kClient, p_.session_id};
  for (Channel* c : {&gen_, &eval_}) {
    c->send({MsgType::kHello, h.to_payload()});
    c->send({MsgType::kParams, p_.to_payload()});
  }
}

InvocationResult ClientSession::invoke_raw(std::span<const uint64_t> words) {
  if (closed_) throw ProtocolError("session closed");
  const gc::CompiledCircuit& cc = *spec_.circuit;
  const std::vector<uint8_t> all = gc::input_bits(cc, words);
  std::vector<uint8_t> mine(client_bits_.size());
  for (size_t i = 0; i < mine.size(); ++i) mine[i] = all[client_bits_[i]];

  const uint64_t tx0 = gen_.bytes_sent() + eval_.bytes_sent();
  const uint64_t rx0 = gen_.bytes_received() + eval_.bytes_received();
  InvocationResult r;
  r.index = invocations_;

  const auto d = p_.digest();
  gen_.send({MsgType::kParams, {d.begin(), d.end()}});
  EncodedInputs enc;
  if (p_.encoding == InputEncoding::kSeeded) {
    const auto seed = gc::GarbleSeed::from_bytes(gen_.recv(MsgType::kSeedMaterial).payload);
    const gc::LabelDeriver der(seed);
    enc.labels.resize(mine.size());
    for (size_t i = 0; i < mine.size(); ++i) enc.labels[i] = der.input_label(client_bits_[i], mine[i]);
    enc.report = client_encode_seeded({}, seed).report;
    enc.report.client_tx_bits = kKappa * mine.size();
  } else {
    const auto pairs = pairs_from_bytes(gen_.recv(MsgType::kInputLabels).payload);
    enc = client_encode_naive(mine, pairs);
  }
  eval_.send({MsgType::kInputLabels, gc::labels_to_bytes(enc.labels)});
  const gc::Frame dm_frame = gc_frame(gen_.recv());
  if (dm_frame.type != gc::GcMsg::kDecodeMap) throw ProtocolError("expected the decode map");
  const gc::DecodeMap dm = gc::DecodeMap::from_bytes(dm_frame.payload);
  const auto out = gc::labels_from_bytes(eval_.recv(MsgType::kOutputLabels).payload);
  r.outputs = gc::output_words(cc, dm.decode(out));
  gen_.send({MsgType::kStepDone, u64_payload(r.index)});
  eval_.send({MsgType::kStepDone, u64_payload(r.index)});

  r.comm.client_tx_bits = 8 * (gen_.bytes_sent() + eval_.bytes_sent() - tx0);
  r.comm.client_rx_bits = 8 * (gen_.bytes_received() + eval_.bytes_received() - rx0);
  r.comm.server_tx_bits = 8 * spec_.server_tx_bytes();
  r.comm.rounds = 2;  // PARAMS -> seed or labels; INPUT_LABELS -> OUTPUT_LABELS
  r.input_encoding = enc.report;
  ++invocations_;
  totals_ += r.comm;
  return r;
}

solver::StepResult ClientSession::invoke(const geometry::CorrespondenceSet& c, const geometry::Pose& x,
                                         InvocationResult* raw) {
  if (c.size() != p_.n)
    throw ProtocolError("session is pinned to n = " + std::to_string(p_.n) + ", got " + std::to_string(c.size()));
  geometry::validate(x);
  InvocationResult r = invoke_raw(solver::iteration_inputs(c, x, p_.cfg.format));
  solver::StepResult s = solver::decode_step(r.outputs.words, r.outputs.overflow, p_.cfg.format);
  if (raw) *raw = std::move(r);
  return s;
}

solver::ChainResult ClientSession::localize(const geometry::CorrespondenceSet& c, const geometry::Pose& x0,
                                            std::vector<InvocationResult>* raws) {
  solver::ChainResult res;
  res.pose = x0;
  for (int it = 0; it < p_.cfg.max_outer; ++it) {
    InvocationResult raw;
    const solver::StepResult s = invoke(c, res.pose, &raw);
    if (raws) raws->push_back(std::move(raw));
    res.steps.push_back(s);
    res.invocations = it + 1;
    res.pose = s.pose;
    if (solver::client_converged(s, p_.cfg)) {
      res.converged = true;
      break;
    }
  }
  return res;
}

void ClientSession::close() {
  if (closed_) return;
  closed_ = true;
  gen_.send({MsgType::kBye, {}});
  eval_.send({MsgType::kBye, {}});
}

// ---- transcripts ----

void TranscriptLog::append(uint64_t invocation, Role observer, Role peer, const std::vector<TranscriptEntry>& e) {
  std::lock_guard lk(mu_);
  if (per_invocation_.size() <= invocation) per_invocation_.resize(invocation + 1);
  for (const auto& x : e) per_invocation_[invocation].push_back({observer, peer, x});
}

std::vector<std::vector<ServerEntry>> TranscriptLog::snapshot() const {
  std::lock_guard lk(mu_);
  // The two servers append concurrently; order by observer and link, keeping
  // each link's message order.
  auto out = per_invocation_;
  for (auto& inv : out)
    std::stable_sort(inv.begin(), inv.end(), [](const ServerEntry& a, const ServerEntry& b) {
      return std::pair(a.observer, a.peer) < std::pair(b.observer, b.peer);
    });
  return out;
}

// ---- servers ----

SessionParams accept_client(Channel& client) {
  const Hello h = Hello::from_payload(client.recv(MsgType::kHello).payload);
  if (h.role != Role::kClient) throw ProtocolError("expected a client HELLO");
  SessionParams p = SessionParams::from_payload(client.recv(MsgType::kParams).payload);
  if (p.session_id != h.session_id) throw ProtocolError("PARAMS session id does not match HELLO");
  return p;
}

uint64_t serve_generator(const SessionParams& p, const CircuitSpec& spec, ServerLinks links, TranscriptLog* log) {
  Channel& client = *links.client;
  Channel& eval = *links.peer;
  if (p.mode == Mode::kSplit && !links.map_owner) throw ProtocolError("split mode needs a map owner link");
  const auto client_bits = spec.input_bits_of(InputOwner::kClient);
  const auto map_bits = spec.input_bits_of(InputOwner::kMapOwner);
  record({&client, &eval, links.map_owner});
  uint64_t o = 0;
  for (;;) {
    const Message req = client.recv();
    if (req.type == MsgType::kBye) {
      eval.send({MsgType::kBye, {}});
      if (links.map_owner) links.map_owner->send({MsgType::kBye, {}});
      return o;
    }
    if (req.type != MsgType::kParams) throw ProtocolError(std::string("unexpected ") + msg_name(req.type));
    check_digest(req, p);

    const gc::GarbleSeed seed = gc::GarbleSeed::random();
    const gc::LabelDeriver d(seed);
    if (p.encoding == InputEncoding::kSeeded) {
      const auto b = seed.to_bytes();
      client.send({MsgType::kSeedMaterial, {b.begin(), b.end()}});
    } else {
      client.send({MsgType::kInputLabels, pair_bytes(pairs_for(d, client_bits))});
    }
    if (p.mode == Mode::kSplit) {
      const gc::OtSender ot;
      links.map_owner->send({MsgType::kOtMsg, ot.setup()});
      const Message choice = links.map_owner->recv(MsgType::kOtMsg);
      links.map_owner->send({MsgType::kOtMsg, ot.respond(choice.payload, pairs_for(d, map_bits))});
    }
    const gc::DecodeMap dm = gc::garble(*spec.circuit, seed, [&](gc::Frame&& f) { eval.send(gc_message(f)); });
    client.send(gc_message(gc::Frame{gc::GcMsg::kDecodeMap, dm.to_bytes()}));
    client.recv(MsgType::kStepDone);
    if (log) {
      log->append(o, Role::kGenerator, Role::kClient, client.take_transcript());
      log->append(o, Role::kGenerator, Role::kEvaluator, eval.take_transcript());
      if (links.map_owner) log->append(o, Role::kGenerator, Role::kMapOwner, links.map_owner->take_transcript());
    }
    ++o;
  }
}

uint64_t serve_evaluator(const SessionParams& p, const CircuitSpec& spec, ServerLinks links, TranscriptLog* log) {
  Channel& client = *links.client;
  Channel& gen = *links.peer;
  if (p.mode == Mode::kSplit && !links.map_owner) throw ProtocolError("split mode needs a map owner link");
  const auto client_bits = spec.input_bits_of(InputOwner::kClient);
  const auto map_bits = spec.input_bits_of(InputOwner::kMapOwner);
  const gc::CompiledCircuit& cc = *spec.circuit;
  record({&client, &gen, links.map_owner});
  uint64_t o = 0;
  for (;;) {
    Message first = gen.recv();
    if (first.type == MsgType::kBye) {
      client.recv(MsgType::kBye);
      return o;
    }
    std::vector<gc::Block> labels(cc.input_bits);
    const auto from_client = gc::labels_from_bytes(client.recv(MsgType::kInputLabels).payload);
    if (from_client.size() != client_bits.size()) throw ProtocolError("wrong number of client input labels");
    for (size_t i = 0; i < client_bits.size(); ++i) labels[client_bits[i]] = from_client[i];
    if (!map_bits.empty()) {
      const auto from_map = gc::labels_from_bytes(links.map_owner->recv(MsgType::kInputLabels).payload);
      if (from_map.size() != map_bits.size()) throw ProtocolError("wrong number of map input labels");
      for (size_t i = 0; i < map_bits.size(); ++i) labels[map_bits[i]] = from_map[i];
    }
    bool first_used = false;
    const auto out = gc::evaluate(
        cc,
        [&]() -> gc::Frame {
          if (!first_used) {
            first_used = true;
            return gc_frame(first);
          }
          return gc_frame(gen.recv());
        },
        labels);
    client.send({MsgType::kOutputLabels, gc::labels_to_bytes(out)});
    client.recv(MsgType::kStepDone);
    if (log) {
      log->append(o, Role::kEvaluator, Role::kClient, client.take_transcript());
      log->append(o, Role::kEvaluator, Role::kGenerator, gen.take_transcript());
      if (links.map_owner) log->append(o, Role::kEvaluator, Role::kMapOwner, links.map_owner->take_transcript());
    }
    ++o;
  }
}

uint64_t serve_map_owner(const SessionParams& p, const CircuitSpec& spec, Channel& generator, Channel& evaluator,
                         const MapWordsFn& map_words) {
  const auto map_bits = spec.input_bits_of(InputOwner::kMapOwner);
  const int width = p.cfg.format.width();
  uint64_t o = 0;
  for (;;) {
    const Message setup = generator.recv();
    if (setup.type == MsgType::kBye) return o;
    if (setup.type != MsgType::kOtMsg) throw ProtocolError(std::string("unexpected ") + msg_name(setup.type));
    const std::vector<uint64_t> words = map_words(o);
    if (words.size() * width != map_bits.size()) throw ProtocolError("map owner has the wrong number of map words");
    std::vector<uint8_t> choices;
    choices.reserve(map_bits.size());
    for (uint64_t w : words)
      for (int i = 0; i < width; ++i) choices.push_back((w >> i) & 1);
    gc::OtReceiver ot(choices);
    generator.send({MsgType::kOtMsg, ot.choose(setup.payload)});
    const auto labels = ot.finish(generator.recv(MsgType::kOtMsg).payload);
    evaluator.send({MsgType::kInputLabels, gc::labels_to_bytes(labels)});
    ++o;
  }
}

// ---- local deployment ----

LocalSession::LocalSession(SessionParams p, LocalSessionOptions o)
    : p_(std::move(p)), spec_(o.spec ? *o.spec : sil_circuit(p_)) {
  p_.validate();
  auto link = [&](Channel*& a, Channel*& b) {
    auto [x, y] = memory_link(o.link);
    a = x.get();
    b = y.get();
    chans_.push_back(std::move(x));
    chans_.push_back(std::move(y));
  };
  Channel *c_g, *g_c, *c_e, *e_c, *g_e, *e_g;
  link(c_g, g_c);
  link(c_e, e_c);
  link(g_e, e_g);
  gen_to_eval_ = g_e;
  Channel *g_m = nullptr, *m_g = nullptr, *e_m = nullptr, *m_e = nullptr;
  if (p_.mode == Mode::kSplit) {
    link(g_m, m_g);
    link(e_m, m_e);
  }
  client_ = std::make_unique<ClientSession>(p_, *c_g, *c_e, spec_);

  spawn([this, g_c, g_e, g_m] {
    const SessionParams sp = accept_client(*g_c);
    serve_generator(sp, spec_, {g_c, g_e, g_m}, &log_);
  });
  spawn([this, e_c, e_g, e_m] {
    const SessionParams sp = accept_client(*e_c);
    serve_evaluator(sp, spec_, {e_c, e_g, e_m}, &log_);
  });
  if (p_.mode == Mode::kSplit)
    spawn([this, m_g, m_e] {
      serve_map_owner(p_, spec_, *m_g, *m_e, [this](uint64_t) {
        std::lock_guard lk(mu_);
        return map_words_;
      });
    });
  client_->open();
}

void LocalSession::spawn(std::function<void()> fn) {
  threads_.emplace_back([this, fn = std::move(fn)] {
    try {
      fn();
    } catch (...) {
      {
        std::lock_guard lk(mu_);
        if (!failure_) failure_ = std::current_exception();
      }
      for (auto& c : chans_) c->close();
    }
  });
}

LocalSession::~LocalSession() {
  try {
    close();
  } catch (...) {
  }
}

void LocalSession::set_map_words(std::vector<uint64_t> words) {
  std::lock_guard lk(mu_);
  map_words_ = std::move(words);
}

solver::StepResult LocalSession::invoke(const geometry::CorrespondenceSet& c, const geometry::Pose& x,
                                        InvocationResult* raw) {
  if (p_.mode == Mode::kSplit) set_map_words(map_input_words(c, p_.cfg.format));
  try {
    return client_->invoke(c, x, raw);
  } catch (...) {
    std::lock_guard lk(mu_);
    if (failure_) std::rethrow_exception(failure_);
    throw;
  }
}

void LocalSession::close() {
  if (closed_) return;
  closed_ = true;
  try {
    client_->close();
  } catch (...) {
  }
  for (auto& t : threads_) t.join();
  threads_.clear();
  std::lock_guard lk(mu_);
  if (failure_) std::rethrow_exception(failure_);
}

uint64_t LocalSession::generator_to_evaluator_bytes() const { return gen_to_eval_->bytes_sent(); }

uint64_t LocalSession::total_bytes() const {
  uint64_t t = 0;
  for (const auto& c : chans_) t += c->bytes_sent();
  return t;
}

PrivacyBound LocalSession::privacy() const {
  return privacy_bound(client_->invocations(), static_cast<uint64_t>(p_.cfg.max_outer));
}

}  // namespace snail::protocol
