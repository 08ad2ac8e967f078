#include "eva/passes.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "eva/analysis.hpp"
#include "eva/error.hpp"
#include "eva/params.hpp"
#include "eva/rewrite.hpp"
#include "eva/serialization.hpp"
#include "eva/validator.hpp"

namespace eva {

namespace {

bool is_level_op(OpCode op) { return op == OpCode::Rescale || op == OpCode::ModSwitch; }

bool cipher_pair(const GraphEditor& g, const Node& n) {
  return is_binary_arith(n.op) && g.node(n.params[0]).is_cipher() &&
         g.node(n.params[1]).is_cipher();
}

/// The single consumer of `id` when it is an `op` reading `id` as operand 0.
std::optional<NodeId> sole_user(const GraphEditor& g, NodeId id, OpCode op) {
  const auto& uses = g.uses(id);
  if (uses.size() != 1 || uses[0].is_output() || uses[0].arg != 0) return std::nullopt;
  if (g.node(uses[0].user).op != op) return std::nullopt;
  return uses[0].user;
}

/// Shared Scalar constants holding 2^bits, created on first use.
class DivisorPool {
 public:
  NodeId get(GraphEditor& g, int bits) {
    auto it = ids_.find(bits);
    if (it != ids_.end()) return it->second;
    const NodeId id = g.add_constant(ValueType::Scalar, {std::ldexp(1.0, bits)}, 0.0);
    ids_.emplace(bits, id);
    return id;
  }

 private:
  std::unordered_map<int, NodeId> ids_;
};

/// Scales of a program under forward rewriting: visited nodes compute theirs
/// from their operands, inserted nodes are recorded by the rule.
class ScaleMemo {
 public:
  double visit(const GraphEditor& g, NodeId id) {
    const Node& n = g.node(id);
    const double s = n.is_instruction()
                         ? instruction_scale(g.program(), n, [&](NodeId q) { return at(q); })
                         : n.scale;
    scales_[id] = s;
    return s;
  }
  void set(NodeId id, double s) { scales_[id] = s; }
  double at(NodeId id) const {
    auto it = scales_.find(id);
    if (it == scales_.end()) throw InternalError("scale of node " + std::to_string(id) + " unknown");
    return it->second;
  }

 private:
  std::unordered_map<NodeId, double> scales_;
};

void require_single_divisor(const Program& p) {
  std::optional<double> seen;
  for (NodeId id : p.instructions()) {
    const Node& n = p.node(id);
    if (n.op != OpCode::Rescale) continue;
    const double d = rescale_divisor(p, n);
    if (seen && *seen != d) {
      throw CompileError("eager modswitch needs every Rescale to use one divisor, found 2^" +
                         format_double(*seen) + " and 2^" + format_double(d));
    }
    seen = d;
  }
}

}  // namespace

double default_waterline(const Program& p) {
  double w = 0;
  bool any = false;
  for (const auto* list : {&p.constants(), &p.inputs()}) {
    for (NodeId id : *list) {
      w = any ? std::max(w, p.node(id).scale) : p.node(id).scale;
      any = true;
    }
  }
  return w;
}

Program waterline_rescale(const Program& p, int sf_bits, std::optional<double> sw) {
  const double w = sw.value_or(default_waterline(p));
  ScaleMemo scales;
  DivisorPool divisors;
  auto rule = [&](GraphEditor& g, NodeId id) {
    const double s = scales.visit(g, id);
    const Node& n = g.node(id);
    if (!n.is_instruction() || n.op != OpCode::Multiply || !n.is_cipher()) return false;
    int needed = 0;
    while (s - static_cast<double>(sf_bits) * (needed + 1) >= w) ++needed;
    // Rescales left by an earlier run of this pass count toward the total.
    NodeId tail = id;
    int existing = 0;
    while (existing < needed) {
      auto next = sole_user(g, tail, OpCode::Rescale);
      if (!next || rescale_divisor(g.program(), g.node(*next)) != sf_bits) break;
      tail = *next;
      ++existing;
    }
    if (existing == needed) return false;
    double cur = s - static_cast<double>(sf_bits) * existing;
    for (int i = existing; i < needed; ++i) {
      const NodeId d = divisors.get(g, sf_bits);
      scales.set(d, 0.0);
      tail = g.splice_after(tail, OpCode::Rescale, std::array{d});
      cur -= sf_bits;
      scales.set(tail, cur);
    }
    return true;
  };
  return rewrite(p, Direction::Forward, rule);
}

Program always_rescale(const Program& p, int sf_bits) {
  ScaleMemo scales;
  DivisorPool divisors;
  auto rule = [&](GraphEditor& g, NodeId id) {
    const double s = scales.visit(g, id);
    const Node& n = g.node(id);
    if (!n.is_instruction() || n.op != OpCode::Multiply || !n.is_cipher()) return false;
    if (sole_user(g, id, OpCode::Rescale)) return false;
    const double lo = std::min(scales.at(n.params[0]), scales.at(n.params[1]));
    const int bits = static_cast<int>(std::min<double>(std::floor(lo), sf_bits));
    if (bits < 1) return false;
    const NodeId d = divisors.get(g, bits);
    scales.set(d, 0.0);
    const NodeId r = g.splice_after(id, OpCode::Rescale, std::array{d});
    scales.set(r, s - bits);
    return true;
  };
  return rewrite(p, Direction::Forward, rule);
}

Program lazy_modswitch(const Program& p) {
  std::unordered_map<NodeId, int> level;
  auto rule = [&](GraphEditor& g, NodeId id) {
    const Node& n = g.node(id);
    bool changed = false;
    if (n.is_instruction() && n.is_cipher() && cipher_pair(g, n)) {
      const int a = level.at(n.params[0]);
      const int b = level.at(n.params[1]);
      if (a != b) {
        const std::size_t low = a < b ? 0 : 1;
        for (int i = 0; i < std::abs(a - b); ++i) {
          const NodeId m = g.insert_on_edge({id, low}, OpCode::ModSwitch);
          level[m] = std::min(a, b) + i + 1;
        }
        changed = true;
      }
    }
    int l = 0;
    if (n.is_instruction() && n.is_cipher()) {
      for (NodeId q : n.params) {
        if (g.node(q).is_cipher()) l = std::max(l, level.at(q));
      }
      if (is_level_op(n.op)) ++l;
    }
    level[id] = l;
    return changed;
  };
  return rewrite(p, Direction::Forward, rule);
}

Program eager_modswitch(const Program& p) {
  require_single_divisor(p);
  const auto lazy = compute_levels(p);
  int lmax = 0;
  for (const auto& [id, l] : lazy) lmax = std::max(lmax, l);

  // rlevel(n) = lmax - level of n once ModSwitch nodes are in place. An
  // output keeps its lazy level, so outputs never gain a ModSwitch.
  std::unordered_map<NodeId, int> rlevel;
  auto rule = [&](GraphEditor& g, NodeId id) {
    const Node& n = g.node(id);
    if (!n.is_cipher()) return false;
    const int own = lmax - lazy.at(id);
    std::vector<std::pair<Use, int>> demands;
    for (const Use& u : g.uses(id)) {
      if (u.is_output()) {
        demands.emplace_back(u, own);
      } else {
        const Node& c = g.node(u.user);
        demands.emplace_back(u, rlevel.at(u.user) + (is_level_op(c.op) ? 1 : 0));
      }
    }
    int r = demands.empty() ? own : 0;
    for (const auto& [u, d] : demands) r = std::max(r, d);
    rlevel[id] = r;

    std::map<int, std::vector<Use>> gaps;
    for (const auto& [u, d] : demands) {
      if (d < r) gaps[r - d].push_back(u);
    }
    bool changed = false;
    for (const auto& [gap, uses] : gaps) {
      NodeId tail = g.splice_after(id, OpCode::ModSwitch, {}, [&](const Use& u) {
        return std::find(uses.begin(), uses.end(), u) != uses.end();
      });
      for (int i = 1; i < gap; ++i) tail = g.splice_after(tail, OpCode::ModSwitch);
      changed = true;
    }
    // Roots start at level 0, so a root whose consumers all want a higher
    // level gets one shared ModSwitch chain.
    if (!n.is_instruction() && r < lmax && !g.uses(id).empty()) {
      NodeId tail = id;
      for (int i = 0; i < lmax - r; ++i) tail = g.splice_after(tail, OpCode::ModSwitch);
      changed = true;
    }
    return changed;
  };
  return rewrite(p, Direction::Backward, rule);
}

Program align_modswitch(const Program& p) {
  // Global modulus list; nullopt marks a position only a ModSwitch has used so far.
  std::vector<std::optional<double>> q;
  std::unordered_map<NodeId, int> level;
  auto rule = [&](GraphEditor& g, NodeId id) {
    const Node& n = g.node(id);
    if (!n.is_instruction() || !n.is_cipher()) {
      level[id] = 0;
      return false;
    }
    bool changed = false;
    auto pad = [&](std::size_t arg, int from, int to) {
      for (int i = from; i < to; ++i) {
        const NodeId m = g.insert_on_edge({id, arg}, OpCode::ModSwitch);
        level[m] = i + 1;
        if (q.size() < static_cast<std::size_t>(i + 1)) q.resize(i + 1);
        changed = true;
      }
    };
    if (n.op == OpCode::Rescale) {
      const int l = level.at(n.params[0]);
      const double d = rescale_divisor(g.program(), n);
      std::size_t k = l;
      while (k < q.size() && q[k] && *q[k] != d) ++k;
      if (k == q.size()) q.emplace_back();
      q[k] = d;
      pad(0, l, static_cast<int>(k));
      level[id] = static_cast<int>(k) + 1;
      return changed;
    }
    if (cipher_pair(g, n)) {
      const int a = level.at(n.params[0]);
      const int b = level.at(n.params[1]);
      if (a < b) pad(0, a, b);
      if (b < a) pad(1, b, a);
    }
    int l = 0;
    for (NodeId x : n.params) {
      if (g.node(x).is_cipher()) l = std::max(l, level.at(x));
    }
    if (n.op == OpCode::ModSwitch) {
      ++l;
      if (q.size() < static_cast<std::size_t>(l)) q.resize(l);
    }
    level[id] = l;
    return changed;
  };
  return rewrite(p, Direction::Forward, rule);
}

Program match_scale(const Program& p, int sf_bits) {
  ScaleMemo scales;
  auto rule = [&](GraphEditor& g, NodeId id) {
    const Node& n = g.node(id);
    bool changed = false;
    if (n.is_instruction() && (n.op == OpCode::Add || n.op == OpCode::Sub) && cipher_pair(g, n)) {
      const double a = scales.at(n.params[0]);
      const double b = scales.at(n.params[1]);
      if (a != b) {
        const double ratio = std::abs(a - b);
        if (ratio > sf_bits) {
          throw CompileError("scale gap 2^" + format_double(ratio) + " at " +
                             std::string(to_string(n.op)) + " exceeds s_f = 2^" +
                             std::to_string(sf_bits));
        }
        const std::size_t low = a < b ? 0 : 1;
        const NodeId one = g.add_constant(ValueType::Scalar, {1.0}, ratio);
        scales.set(one, ratio);
        const NodeId m = g.insert_on_edge({id, low}, OpCode::Multiply, std::array{one});
        scales.set(m, std::max(a, b));
        changed = true;
      }
    }
    scales.visit(g, id);
    return changed;
  };
  return rewrite(p, Direction::Forward, rule);
}

Program relinearize(const Program& p) {
  auto rule = [&](GraphEditor& g, NodeId id) {
    const Node& n = g.node(id);
    if (!n.is_instruction() || n.op != OpCode::Multiply || !cipher_pair(g, n)) return false;
    if (sole_user(g, id, OpCode::Relinearize)) return false;
    g.splice_after(id, OpCode::Relinearize);
    return true;
  };
  return rewrite(p, Direction::Forward, rule);
}

CompilationResult analyze_compiled(Program p, int sf_bits) {
  auto violations = validate(p, sf_bits);
  if (!violations.empty()) throw ValidationError(std::move(violations));
  CompilationResult out;
  out.bit_sizes = select_parameters(p, sf_bits);
  out.r = chain_length_formula(p, sf_bits);
  int total = 0;
  for (int b : out.bit_sizes) total += b;
  out.log_q = total - out.bit_sizes.front();
  out.poly_degree = poly_degree_stub(total);
  out.rotation_steps = select_rotation_steps(p);
  out.program = std::move(p);
  return out;
}

CompilationResult compile(const Program& input, const CompileOptions& opts) {
  for (NodeId id : input.instructions()) {
    const Node& n = input.node(id);
    if (is_compiler_only(n.op)) {
      throw UnsupportedOpcode("node " + std::to_string(id) + ": " + std::string(to_string(n.op)) +
                              " is not allowed in an input program");
    }
  }
  Program p = input;
  for (const auto& [node, scale] : opts.output_scales) {
    bool found = false;
    for (Output& o : p.mutable_outputs()) {
      if (o.node == node) {
        o.scale = scale;
        found = true;
      }
    }
    if (!found) throw ProgramError("no output reads node " + std::to_string(node));
  }
  p.check();

  p = opts.rescale == RescaleStrategy::Waterline ? waterline_rescale(p, opts.sf_bits, opts.waterline)
                                                 : always_rescale(p, opts.sf_bits);
  switch (opts.modswitch) {
    case ModSwitchStrategy::Eager:
      p = eager_modswitch(p);
      break;
    case ModSwitchStrategy::Lazy:
      p = lazy_modswitch(p);
      break;
    case ModSwitchStrategy::Align:
      p = align_modswitch(p);
      break;
  }
  p = match_scale(p, opts.sf_bits);
  p = relinearize(p);
  return analyze_compiled(std::move(p), opts.sf_bits);
}

CompilationResult compile_baseline(const Program& p, CompileOptions opts) {
  opts.rescale = RescaleStrategy::Always;
  opts.modswitch = ModSwitchStrategy::Align;
  return compile(p, opts);
}

}  // namespace eva
