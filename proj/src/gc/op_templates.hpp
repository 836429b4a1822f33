#pragma once

#include "gc/circuit.hpp"
#include "obliv/format.hpp"
#include "obliv/tape.hpp"

namespace snail::gc {

// Circuit for one tape op. Inputs are the operand words in order (selects:
// condition bit first), then the sticky overflow bit when `sticky`; outputs
// are the result word, then the updated sticky bit.
struct OpTemplate {
  BoolCircuit circuit;
  std::vector<int> operand_widths;
  int result_width = 0;
  bool sticky = false;
};

// Built once per (kind, format, on_bits) and shared; thread safe.
const OpTemplate& op_template(obliv::OpKind kind, obliv::NumericFormat fmt, bool on_bits = false);

bool op_has_template(obliv::OpKind kind);

}  // namespace snail::gc
