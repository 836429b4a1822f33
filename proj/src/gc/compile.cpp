#include "gc/compile.hpp"

#include "gc/walk.hpp"

namespace snail::gc {

using obliv::OpKind;

CompiledCircuit compile(std::shared_ptr<const obliv::ObliviousTape> tape) {
  const auto& t = *tape;
  CompiledCircuit c;
  c.sticky = t.format.is_fixed();
  const int w = t.format.width();
  c.slot_offset.resize(t.ops.size());
  c.slot_width.resize(t.ops.size());
  uint32_t next = 0;
  for (size_t i = 0; i < t.ops.size(); ++i) {
    const int sw = t.is_bit[i] ? 1 : w;
    c.slot_offset[i] = next;
    c.slot_width[i] = static_cast<uint8_t>(sw);
    next += sw;
    const auto& op = t.ops[i];
    if (op.kind == OpKind::kInput) {
      c.input_bits += sw;
      continue;
    }
    if (!op_has_template(op.kind)) continue;
    const bool on_bits = op.kind == OpKind::kSelect && t.is_bit[op.b];
    const OpTemplate& tm = op_template(op.kind, t.format, on_bits);
    c.steps.push_back({&tm, static_cast<uint32_t>(i), {op.a, op.b, op.c}});
    c.and_gates += tm.circuit.and_count();
    c.xor_gates += tm.circuit.xor_count();
  }
  c.label_count = next + 1;  // last cell holds the sticky flag
  for (uint32_t o : t.outputs) c.output_bits += c.slot_width[o];
  if (c.sticky) ++c.output_bits;
  c.digest = obliv::structure_digest(t);
  c.tape = std::move(tape);
  return c;
}

CompiledCircuit compile(const obliv::ObliviousTape& tape) {
  return compile(std::make_shared<const obliv::ObliviousTape>(tape));
}

BoolCircuit flatten(const CompiledCircuit& c) {
  BoolCircuit out;
  out.num_inputs = c.input_bits;
  std::vector<Wire> lab(c.label_count);
  for (uint32_t i = 0; i < c.input_bits; ++i) lab[detail::input_label_index(c, i)] = 2 + i;
  const Wire consts[2] = {kFalse, kTrue};
  detail::walk(c, lab, consts, [&](const BoolCircuit& t, std::vector<Wire>& local) {
    for (const Gate& g : t.gates) {
      out.gates.push_back({g.kind, local[g.a], local[g.b]});
      local.push_back(out.first_gate_wire() + static_cast<Wire>(out.gates.size()) - 1);
    }
  });
  out.outputs = detail::output_labels(c, lab);
  return out;
}

std::vector<uint8_t> input_bits(const CompiledCircuit& c, std::span<const uint64_t> words) {
  if (words.size() != c.tape->inputs.size())
    throw CircuitError("circuit expects " + std::to_string(c.tape->inputs.size()) + " input words");
  std::vector<uint8_t> bits;
  bits.reserve(c.input_bits);
  for (size_t k = 0; k < words.size(); ++k) {
    const int w = c.slot_width[c.tape->inputs[k]];
    for (int i = 0; i < w; ++i) bits.push_back((words[k] >> i) & 1);
  }
  return bits;
}

DecodedOutputs output_words(const CompiledCircuit& c, const std::vector<uint8_t>& bits) {
  if (bits.size() != c.output_bits) throw CircuitError("output bit count mismatch");
  DecodedOutputs d;
  size_t pos = 0;
  for (uint32_t o : c.tape->outputs) {
    uint64_t v = 0;
    for (int i = 0; i < c.slot_width[o]; ++i) v |= static_cast<uint64_t>(bits[pos++] & 1) << i;
    d.words.push_back(v);
  }
  if (c.sticky) d.overflow = bits[pos] != 0;
  return d;
}

std::vector<uint8_t> eval_plain(const CompiledCircuit& c, const std::vector<uint8_t>& inputs) {
  if (inputs.size() != c.input_bits) throw CircuitError("circuit input count mismatch");
  std::vector<uint8_t> lab(c.label_count);
  for (uint32_t i = 0; i < c.input_bits; ++i) lab[detail::input_label_index(c, i)] = inputs[i] & 1;
  const uint8_t consts[2] = {0, 1};
  detail::walk(c, lab, consts, [](const BoolCircuit& t, std::vector<uint8_t>& local) {
    for (const Gate& g : t.gates)
      local.push_back(g.kind == GateKind::kAnd ? (local[g.a] & local[g.b]) : (local[g.a] ^ local[g.b]));
  });
  return detail::output_labels(c, lab);
}

}  // namespace snail::gc
