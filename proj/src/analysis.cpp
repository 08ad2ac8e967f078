#include "eva/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "eva/serialization.hpp"

namespace eva {

bool RescaleChain::equals(const RescaleChain& other) const {
  if (size() != other.size()) return false;
  for (std::size_t i = 0; i < size(); ++i) {
    const double a = elements_[i];
    const double b = other.elements_[i];
    if (a != b && a != kModSwitchMark && b != kModSwitchMark) return false;
  }
  return true;
}

RescaleChain RescaleChain::meet(const RescaleChain& other) const {
  if (!equals(other)) throw InternalError("meet of unequal chains");
  std::vector<double> out(elements_);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] == kModSwitchMark) out[i] = other.elements_[i];
  }
  return RescaleChain(std::move(out));
}

std::string RescaleChain::to_string() const {
  std::ostringstream os;
  os << '{';
  for (std::size_t i = 0; i < size(); ++i) {
    if (i) os << ", ";
    if (elements_[i] == kModSwitchMark) {
      os << 'M';
    } else {
      os << format_double(elements_[i]);
    }
  }
  os << '}';
  return os.str();
}

double rescale_divisor(const Program& p, const Node& rescale) {
  const Node& d = p.node(rescale.params.at(1));
  if (!d.is_constant() || d.value.size() != 1 || !(d.value[0] > 0)) {
    throw ProgramError("rescale divisor must be a positive scalar constant");
  }
  return std::log2(d.value[0]);
}

namespace {

bool is_cipher(const Program& p, NodeId id) { return p.node(id).is_cipher(); }

}  // namespace

double instruction_scale(const Program& p, const Node& n,
                         const std::function<double(NodeId)>& scale_of) {
  const auto& a = n.params;
  switch (n.op) {
    case OpCode::Multiply:
      return scale_of(a[0]) + scale_of(a[1]);
    case OpCode::Add:
    case OpCode::Sub: {
      const bool c0 = is_cipher(p, a[0]);
      const bool c1 = is_cipher(p, a[1]);
      if (c0 && !c1) return scale_of(a[0]);
      if (c1 && !c0) return scale_of(a[1]);
      return std::max(scale_of(a[0]), scale_of(a[1]));
    }
    case OpCode::Rescale:
      return scale_of(a[0]) - rescale_divisor(p, n);
    default:
      return scale_of(a[0]);
  }
}

NodeState<double> compute_scales(const Program& p) {
  NodeState<double> s;
  auto get = [&](NodeId q) { return s.at(q); };
  for (NodeId id : p.topological_order()) {
    const Node& n = p.node(id);
    s.set(id, n.is_instruction() ? instruction_scale(p, n, get) : n.scale);
  }
  return s;
}

NodeState<int> compute_npoly(const Program& p) {
  NodeState<int> k;
  for (NodeId id : p.topological_order()) {
    const Node& n = p.node(id);
    int v = 0;
    if (n.is_cipher()) {
      if (!n.is_instruction()) {
        v = 2;
      } else if (n.op == OpCode::Relinearize) {
        v = 2;
      } else if (n.op == OpCode::Multiply) {
        const int a = k.at(n.params[0]);
        const int b = k.at(n.params[1]);
        v = (a && b) ? a + b - 1 : std::max(a, b);
      } else if (n.op == OpCode::Add || n.op == OpCode::Sub) {
        v = std::max(k.at(n.params[0]), k.at(n.params[1]));
      } else {
        v = k.at(n.params[0]);
      }
    }
    k.set(id, v);
  }
  return k;
}

NodeState<std::optional<RescaleChain>> compute_chains(const Program& p) {
  NodeState<std::optional<RescaleChain>> c;
  for (NodeId id : p.topological_order()) {
    const Node& n = p.node(id);
    std::optional<RescaleChain> v;
    if (n.is_cipher()) {
      if (!n.is_instruction()) {
        v = RescaleChain{};
      } else {
        const std::size_t operands = n.op == OpCode::Rescale ? 1 : n.params.size();
        bool ok = true;
        for (std::size_t i = 0; i < operands && ok; ++i) {
          if (!is_cipher(p, n.params[i])) continue;
          const auto& pc = c.at(n.params[i]);
          if (!pc) {
            ok = false;
          } else if (!v) {
            v = *pc;
          } else if (v->equals(*pc)) {
            v = v->meet(*pc);
          } else {
            ok = false;
          }
        }
        if (!ok) {
          v.reset();
        } else if (n.op == OpCode::Rescale) {
          v->push(rescale_divisor(p, n));
        } else if (n.op == OpCode::ModSwitch) {
          v->push(kModSwitchMark);
        }
      }
    }
    c.set(id, std::move(v));
  }
  return c;
}

NodeState<int> compute_levels(const Program& p) {
  NodeState<int> l;
  for (NodeId id : p.topological_order()) {
    const Node& n = p.node(id);
    int v = 0;
    if (n.is_cipher() && n.is_instruction()) {
      for (NodeId q : n.params) {
        if (is_cipher(p, q)) v = std::max(v, l.at(q));
      }
      if (n.op == OpCode::Rescale || n.op == OpCode::ModSwitch) ++v;
    }
    l.set(id, v);
  }
  return l;
}

}  // namespace eva
