#pragma once

#include <exception>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "gc/compile.hpp"
#include "protocol/accounting.hpp"
#include "protocol/channel.hpp"
#include "protocol/messages.hpp"
#include "solver/solver.hpp"

namespace snail::protocol {

enum class InputOwner : uint8_t { kClient, kMapOwner };

// The circuit every invocation of a session runs, and who supplies each
// input word.
struct CircuitSpec {
  std::shared_ptr<const gc::CompiledCircuit> circuit;
  std::vector<InputOwner> owners;

  // Circuit input bit indices supplied by `who`, ascending.
  std::vector<uint32_t> input_bits_of(InputOwner who) const;
  // Framed bytes the generator sends the evaluator per invocation.
  uint64_t server_tx_bytes() const;
};

// One sil_step circuit for the pinned parameters; compiled once per process.
CircuitSpec sil_circuit(const SessionParams& p);

struct InvocationResult {
  uint64_t index = 0;
  gc::DecodedOutputs outputs;
  CommReport comm;            // all traffic on the client's links
  CommReport input_encoding;  // label material only
};

// Client side of a session against a generator and an evaluator.
class ClientSession {
 public:
  ClientSession(SessionParams p, Channel& generator, Channel& evaluator, std::optional<CircuitSpec> spec = {});

  // HELLO and PARAMS to both servers.
  void open();
  // One garbled evaluation. `words` holds every input word; words owned by
  // the map owner are ignored.
  InvocationResult invoke_raw(std::span<const uint64_t> words);
  solver::StepResult invoke(const geometry::CorrespondenceSet& c, const geometry::Pose& x,
                            InvocationResult* raw = nullptr);
  // Chains invocations until the client sees convergence or max_outer ran.
  solver::ChainResult localize(const geometry::CorrespondenceSet& c, const geometry::Pose& x0,
                               std::vector<InvocationResult>* raws = nullptr);
  void close();

  uint64_t invocations() const { return invocations_; }
  const CommReport& totals() const { return totals_; }
  const SessionParams& params() const { return p_; }
  const CircuitSpec& spec() const { return spec_; }

 private:
  SessionParams p_;
  Channel& gen_;
  Channel& eval_;
  CircuitSpec spec_;
  std::vector<uint32_t> client_bits_;
  uint64_t invocations_ = 0;
  CommReport totals_;
  bool closed_ = false;
};

// Server-observable metadata, grouped per invocation.
struct ServerEntry {
  Role observer{};
  Role peer{};
  TranscriptEntry entry;
  friend bool operator==(const ServerEntry&, const ServerEntry&) = default;
};

class TranscriptLog {
 public:
  void append(uint64_t invocation, Role observer, Role peer, const std::vector<TranscriptEntry>& entries);
  std::vector<std::vector<ServerEntry>> snapshot() const;

 private:
  mutable std::mutex mu_;
  std::vector<std::vector<ServerEntry>> per_invocation_;
};

struct ServerLinks {
  Channel* client = nullptr;
  Channel* peer = nullptr;       // the other server
  Channel* map_owner = nullptr;  // split mode only
};

// Reads HELLO and PARAMS from a client link.
SessionParams accept_client(Channel& client);

// Serve invocations until BYE; both return the number of invocations.
uint64_t serve_generator(const SessionParams& p, const CircuitSpec& spec, ServerLinks links,
                         TranscriptLog* log = nullptr);
uint64_t serve_evaluator(const SessionParams& p, const CircuitSpec& spec, ServerLinks links,
                         TranscriptLog* log = nullptr);

// The split-setting map owner: per invocation, obtains its labels from the
// generator by base OT and hands them to the evaluator. `map_words(o)` gives
// the raw words of the map-owned inputs for invocation o.
using MapWordsFn = std::function<std::vector<uint64_t>(uint64_t)>;
uint64_t serve_map_owner(const SessionParams& p, const CircuitSpec& spec, Channel& generator, Channel& evaluator,
                         const MapWordsFn& map_words);

// Raw words of the map-owned inputs of a correspondence set.
std::vector<uint64_t> map_input_words(const geometry::CorrespondenceSet& c, obliv::NumericFormat fmt);

struct LocalSessionOptions {
  MemoryLinkOptions link;
  std::optional<CircuitSpec> spec;  // defaults to sil_circuit(params)
};

// Client, generator, evaluator (and map owner in split mode) in one process,
// connected by memory links; servers run on their own threads.
class LocalSession {
 public:
  explicit LocalSession(SessionParams p, LocalSessionOptions o = {});
  ~LocalSession();
  LocalSession(const LocalSession&) = delete;
  LocalSession& operator=(const LocalSession&) = delete;

  ClientSession& client() { return *client_; }
  // Split mode: the map owner's words for the next invocations.
  void set_map_words(std::vector<uint64_t> words);
  solver::StepResult invoke(const geometry::CorrespondenceSet& c, const geometry::Pose& x,
                            InvocationResult* raw = nullptr);
  // BYE, join the servers and rethrow the first server failure.
  void close();

  std::vector<std::vector<ServerEntry>> server_transcripts() const { return log_.snapshot(); }
  // Framed bytes the generator sent the evaluator.
  uint64_t generator_to_evaluator_bytes() const;
  // Total framed bytes sent over every link.
  uint64_t total_bytes() const;
  PrivacyBound privacy() const;

 private:
  void spawn(std::function<void()> fn);

  SessionParams p_;
  CircuitSpec spec_;
  std::vector<std::unique_ptr<Channel>> chans_;
  Channel* gen_to_eval_ = nullptr;
  std::unique_ptr<ClientSession> client_;
  TranscriptLog log_;
  std::vector<std::thread> threads_;
  std::mutex mu_;
  std::exception_ptr failure_;
  std::vector<uint64_t> map_words_;
  bool closed_ = false;
};

}  // namespace snail::protocol
