#include "eva/dot.hpp"

#include <sstream>

#include "eva/analysis.hpp"
#include "eva/serialization.hpp"

namespace eva {

std::string to_dot(const Program& p) {
  const auto scales = compute_scales(p);
  std::ostringstream os;
  os << "digraph eva {\n  node [shape=box, fontname=\"monospace\"];\n";
  for (NodeId id : p.topological_order()) {
    const Node& n = p.node(id);
    std::string label = std::to_string(id) + ": ";
    if (n.is_instruction()) {
      label += std::string(to_string(n.op));
    } else if (n.is_input()) {
      label += "INPUT";
    } else {
      label += n.value.size() == 1 ? "CONST " + format_double(n.value[0]) : "CONST";
    }
    label += "\\n" + std::string(to_string(n.type)) + " 2^" + format_double(scales.at(id));
    os << "  n" << id << " [label=\"" << label << "\"";
    if (n.is_instruction() && is_compiler_only(n.op)) os << ", style=filled, fillcolor=lightgrey";
    os << "];\n";
  }
  for (NodeId id : p.topological_order()) {
    const Node& n = p.node(id);
    for (std::size_t k = 0; k < n.params.size(); ++k) {
      os << "  n" << n.params[k] << " -> n" << id << " [label=\"" << k << "\"];\n";
    }
  }
  for (std::size_t i = 0; i < p.outputs().size(); ++i) {
    const Output& o = p.outputs()[i];
    os << "  out" << i << " [shape=ellipse, label=\"output " << i << "\\n2^" << format_double(o.scale)
       << "\"];\n  n" << o.node << " -> out" << i << ";\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace eva
