#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "geometry/camera.hpp"
#include "json.hpp"
#include "solver/config.hpp"

namespace snail::protocol {

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Frame = [u32 LE length of type + payload][type][payload], the same layout as
// the garbled stream, which travels nested inside GC_STREAM messages.
enum class MsgType : uint8_t {
  kHello = 1,
  kParams = 2,
  kSeedMaterial = 3,
  kGcStream = 4,
  kInputLabels = 5,
  kOtMsg = 6,
  kOutputLabels = 7,
  kStepDone = 8,
  kBye = 9,
};
const char* msg_name(MsgType t);

constexpr size_t kMsgHeaderBytes = 5;

struct Message {
  MsgType type{};
  std::vector<uint8_t> payload;
  uint64_t wire_bytes() const { return kMsgHeaderBytes + payload.size(); }
};

std::vector<uint8_t> encode_message(const Message& m);
// Parses the 5-byte header; returns the payload length.
size_t parse_header(const uint8_t* hdr, MsgType& type);

enum class Role : uint8_t { kClient = 0, kGenerator = 1, kEvaluator = 2, kMapOwner = 3 };
const char* role_name(Role r);
Role parse_role(const std::string& s);

enum class Mode : uint8_t { kOffload = 0, kSplit = 1 };
enum class InputEncoding : uint8_t { kSeeded = 0, kNaive = 1 };
const char* mode_name(Mode m);
Mode parse_mode(const std::string& s);
const char* encoding_name(InputEncoding e);
InputEncoding parse_encoding(const std::string& s);

struct Hello {
  Role role = Role::kClient;
  uint64_t session_id = 0;

  std::vector<uint8_t> to_payload() const;
  static Hello from_payload(std::span<const uint8_t> p);
};

// Negotiated once and pinned for the session.
struct SessionParams {
  uint64_t session_id = 0;
  size_t n = 6;
  geometry::Intrinsics k;
  solver::SolverConfig cfg;
  Mode mode = Mode::kOffload;
  InputEncoding encoding = InputEncoding::kSeeded;
  std::string evaluator_addr;  // for the generator's link in TCP deployments

  void validate() const;
  nlohmann::json to_json() const;
  static SessionParams from_json(const nlohmann::json& j);
  std::vector<uint8_t> to_payload() const;
  static SessionParams from_payload(std::span<const uint8_t> p);
  // Digest of the pinned fields; every invocation request carries it.
  std::array<uint8_t, 32> digest() const;
};

}  // namespace snail::protocol
