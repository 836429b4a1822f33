#include "protocol/messages.hpp"

#include <sodium.h>

#include <limits>

namespace snail::protocol {

const char* msg_name(MsgType t) {
  switch (t) {
    case MsgType::kHello: return "HELLO";
    case MsgType::kParams: return "PARAMS";
    case MsgType::kSeedMaterial: return "SEED_MATERIAL";
    case MsgType::kGcStream: return "GC_STREAM";
    case MsgType::kInputLabels: return "INPUT_LABELS";
    case MsgType::kOtMsg: return "OT_MSG";
    case MsgType::kOutputLabels: return "OUTPUT_LABELS";
    case MsgType::kStepDone: return "STEP_DONE";
    case MsgType::kBye: return "BYE";
  }
  return "?";
}

std::vector<uint8_t> encode_message(const Message& m) {
  if (m.payload.size() >= std::numeric_limits<uint32_t>::max()) throw ProtocolError("message too large");
  const uint32_t len = static_cast<uint32_t>(m.payload.size() + 1);
  std::vector<uint8_t> out;
  out.reserve(kMsgHeaderBytes + m.payload.size());
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(len >> (8 * i)));
  out.push_back(static_cast<uint8_t>(m.type));
  out.insert(out.end(), m.payload.begin(), m.payload.end());
  return out;
}

size_t parse_header(const uint8_t* hdr, MsgType& type) {
  uint32_t len = 0;
  for (int i = 0; i < 4; ++i) len |= static_cast<uint32_t>(hdr[i]) << (8 * i);
  if (len == 0) throw ProtocolError("zero-length message");
  if (hdr[4] < 1 || hdr[4] > 9) throw ProtocolError("unknown message type " + std::to_string(hdr[4]));
  type = static_cast<MsgType>(hdr[4]);
  return len - 1;
}

const char* role_name(Role r) {
  switch (r) {
    case Role::kClient: return "client";
    case Role::kGenerator: return "generator";
    case Role::kEvaluator: return "evaluator";
    case Role::kMapOwner: return "map_owner";
  }
  return "?";
}

Role parse_role(const std::string& s) {
  for (Role r : {Role::kClient, Role::kGenerator, Role::kEvaluator, Role::kMapOwner})
    if (s == role_name(r)) return r;
  throw ProtocolError("unknown role '" + s + "'");
}

const char* mode_name(Mode m) { return m == Mode::kOffload ? "offload" : "split"; }

Mode parse_mode(const std::string& s) {
  if (s == "offload") return Mode::kOffload;
  if (s == "split") return Mode::kSplit;
  throw ProtocolError("unknown mode '" + s + "'");
}

const char* encoding_name(InputEncoding e) { return e == InputEncoding::kSeeded ? "seeded" : "naive"; }

InputEncoding parse_encoding(const std::string& s) {
  if (s == "seeded") return InputEncoding::kSeeded;
  if (s == "naive") return InputEncoding::kNaive;
  throw ProtocolError("unknown input encoding '" + s + "'");
}

std::vector<uint8_t> Hello::to_payload() const {
  std::vector<uint8_t> out{static_cast<uint8_t>(role)};
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(session_id >> (8 * i)));
  return out;
}

Hello Hello::from_payload(std::span<const uint8_t> p) {
  if (p.size() != 9 || p[0] > 3) throw ProtocolError("malformed HELLO");
  Hello h;
  h.role = static_cast<Role>(p[0]);
  for (int i = 0; i < 8; ++i) h.session_id |= static_cast<uint64_t>(p[1 + i]) << (8 * i);
  return h;
}

void SessionParams::validate() const {
  if (n < 6) throw ProtocolError("sessions need n >= 6 correspondences");
  cfg.validate();
  geometry::validate(k);
  if (mode == Mode::kSplit && encoding == InputEncoding::kSeeded)
    throw ProtocolError("seeded input encoding needs the client to own every input; use naive in split mode");
}

nlohmann::json SessionParams::to_json() const {
  return {{"session_id", session_id},
          {"n", n},
          {"intrinsics", {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy}}},
          {"solver", solver::to_json(cfg)},
          {"mode", mode_name(mode)},
          {"encoding", encoding_name(encoding)},
          {"evaluator_addr", evaluator_addr}};
}

SessionParams SessionParams::from_json(const nlohmann::json& j) {
  SessionParams p;
  try {
    if (j.contains("session_id")) p.session_id = j.at("session_id").get<uint64_t>();
    if (j.contains("n")) p.n = j.at("n").get<size_t>();
    if (j.contains("intrinsics")) {
      const auto& k = j.at("intrinsics");
      p.k = {k.at("fx").get<double>(), k.at("fy").get<double>(), k.at("cx").get<double>(), k.at("cy").get<double>()};
    }
    if (j.contains("solver")) p.cfg = solver::config_from_json(j.at("solver"));
    if (j.contains("mode")) p.mode = parse_mode(j.at("mode").get<std::string>());
    if (j.contains("encoding")) p.encoding = parse_encoding(j.at("encoding").get<std::string>());
    if (j.contains("evaluator_addr")) p.evaluator_addr = j.at("evaluator_addr").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("bad session params: ") + e.what());
  }
  p.validate();
  return p;
}

std::vector<uint8_t> SessionParams::to_payload() const {
  const std::string s = to_json().dump();
  return {s.begin(), s.end()};
}

SessionParams SessionParams::from_payload(std::span<const uint8_t> p) {
  const auto j = nlohmann::json::parse(p.begin(), p.end(), nullptr, false);
  if (j.is_discarded()) throw ProtocolError("PARAMS payload is not JSON");
  return from_json(j);
}

std::array<uint8_t, 32> SessionParams::digest() const {
  const std::string s = to_json().dump();
  std::array<uint8_t, 32> d{};
  crypto_generichash(d.data(), d.size(), reinterpret_cast<const uint8_t*>(s.data()), s.size(), nullptr, 0);
  return d;
}

}  // namespace snail::protocol
