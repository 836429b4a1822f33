#pragma once

// Shared traversal of a compiled circuit: plaintext evaluation, garbling,
// evaluation and flattening all visit the same templates in the same order
// and differ only in what a wire carries and how a gate list is processed.

#include <vector>

#include "gc/compile.hpp"

namespace snail::gc::detail {

inline uint32_t input_label_index(const CompiledCircuit& c, uint32_t bit) {
  const int w = c.format().width();
  return c.slot_offset[c.tape->inputs[bit / w]] + bit % w;
}

inline uint32_t sticky_index(const CompiledCircuit& c) { return c.label_count - 1; }

template <class V>
std::vector<V> output_labels(const CompiledCircuit& c, const std::vector<V>& lab) {
  std::vector<V> out;
  out.reserve(c.output_bits);
  for (uint32_t o : c.tape->outputs)
    for (int i = 0; i < c.slot_width[o]; ++i) out.push_back(lab[c.slot_offset[o] + i]);
  if (c.sticky) out.push_back(lab[sticky_index(c)]);
  return out;
}

// `gates(tmpl, local)` receives the template's constant and input wires in
// `local` and must append one value per gate.
template <class V, class GateFn>
void walk(const CompiledCircuit& c, std::vector<V>& lab, const V (&consts)[2], GateFn&& gates) {
  using obliv::OpKind;
  const auto& t = *c.tape;
  lab[sticky_index(c)] = consts[0];
  std::vector<V> local;
  size_t next_step = 0;
  for (size_t i = 0; i < t.ops.size(); ++i) {
    const auto& op = t.ops[i];
    const uint32_t off = c.slot_offset[i];
    switch (op.kind) {
      case OpKind::kInput:
        continue;
      case OpKind::kConst:
        for (int b = 0; b < c.slot_width[i]; ++b) lab[off + b] = consts[(op.imm >> b) & 1];
        continue;
      case OpKind::kConstBit:
        lab[off] = consts[op.imm & 1];
        continue;
      default:
        break;
    }
    const CompiledStep& st = c.steps[next_step++];
    const BoolCircuit& circ = st.tmpl->circuit;
    local.clear();
    local.reserve(circ.num_wires());
    local.push_back(consts[0]);
    local.push_back(consts[1]);
    for (size_t k = 0; k < st.tmpl->operand_widths.size(); ++k) {
      const uint32_t src = c.slot_offset[st.operands[k]];
      for (int b = 0; b < st.tmpl->operand_widths[k]; ++b) local.push_back(lab[src + b]);
    }
    if (st.tmpl->sticky) local.push_back(lab[sticky_index(c)]);
    gates(circ, local);
    for (int b = 0; b < st.tmpl->result_width; ++b) lab[off + b] = local[circ.outputs[b]];
    if (st.tmpl->sticky) lab[sticky_index(c)] = local[circ.outputs[st.tmpl->result_width]];
  }
}

}  // namespace snail::gc::detail
