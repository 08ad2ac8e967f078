#include "eva/validator.hpp"

#include <cmath>

#include <json.hpp>

#include "eva/analysis.hpp"
#include "eva/serialization.hpp"

namespace eva {

std::vector<Violation> check_chains(const Program& p) {
  std::vector<Violation> out;
  const auto chains = compute_chains(p);
  for (NodeId id : p.topological_order()) {
    const Node& n = p.node(id);
    if (!n.is_instruction() || !is_binary_arith(n.op)) continue;
    const NodeId a = n.params[0];
    const NodeId b = n.params[1];
    if (!p.node(a).is_cipher() || !p.node(b).is_cipher()) continue;
    const auto& ca = chains.at(a);
    const auto& cb = chains.at(b);
    // A missing chain was already reported where it first broke.
    if (!ca || !cb || ca->equals(*cb)) continue;
    out.push_back({1, id,
                   std::string(to_string(n.op)) + " operand chains " + ca->to_string() + " and " +
                       cb->to_string() + " differ"});
  }
  return out;
}

std::vector<Violation> check_scales(const Program& p, int sf_bits) {
  std::vector<Violation> out;
  const auto scales = compute_scales(p);
  for (NodeId id : p.topological_order()) {
    const Node& n = p.node(id);
    if (!n.is_instruction()) continue;
    if (n.op == OpCode::Add || n.op == OpCode::Sub) {
      const NodeId a = n.params[0];
      const NodeId b = n.params[1];
      if (p.node(a).is_cipher() && p.node(b).is_cipher() && scales.at(a) != scales.at(b)) {
        out.push_back({2, id,
                       std::string(to_string(n.op)) + " operand scales 2^" +
                           format_double(scales.at(a)) + " and 2^" + format_double(scales.at(b)) +
                           " differ"});
      }
    }
  }
  for (NodeId id : p.topological_order()) {
    const Node& n = p.node(id);
    if (!n.is_instruction() || n.op != OpCode::Rescale) continue;
    const double d = rescale_divisor(p, n);
    if (d > sf_bits || d < 1 || d != std::floor(d)) {
      out.push_back({4, id,
                     "rescale by 2^" + format_double(d) + " outside [2^1, 2^" +
                         std::to_string(sf_bits) + "]"});
    }
  }
  return out;
}

std::vector<Violation> check_npoly(const Program& p) {
  std::vector<Violation> out;
  const auto k = compute_npoly(p);
  for (NodeId id : p.topological_order()) {
    const Node& n = p.node(id);
    if (!n.is_instruction() || n.op == OpCode::Relinearize) continue;
    for (std::size_t i = 0; i < n.params.size(); ++i) {
      const NodeId q = n.params[i];
      if (p.node(q).is_cipher() && k.at(q) != 2) {
        out.push_back({3, id,
                       std::string(to_string(n.op)) + " operand " + std::to_string(i) + " (node " +
                           std::to_string(q) + ") has " + std::to_string(k.at(q)) +
                           " polynomials"});
      }
    }
  }
  for (const Output& o : p.outputs()) {
    if (p.node(o.node).is_cipher() && k.at(o.node) != 2) {
      out.push_back({3, o.node, "output has " + std::to_string(k.at(o.node)) + " polynomials"});
    }
  }
  return out;
}

std::vector<Violation> validate(const Program& p, int sf_bits) {
  std::vector<Violation> out = check_chains(p);
  std::vector<Violation> scales = check_scales(p, sf_bits);
  std::vector<Violation> polys = check_npoly(p);
  // check_scales reports constraint 2 before constraint 4.
  for (const Violation& v : scales) {
    if (v.constraint == 2) out.push_back(v);
  }
  out.insert(out.end(), polys.begin(), polys.end());
  for (const Violation& v : scales) {
    if (v.constraint == 4) out.push_back(v);
  }
  return out;
}

std::string render(const Violation& v) {
  return "C" + std::to_string(v.constraint) + " node=" + std::to_string(v.node) + " " + v.detail;
}

std::string render_json(const Violation& v) {
  nlohmann::ordered_json j;
  j["kind"] = "violation";
  j["constraint"] = v.constraint;
  j["node"] = v.node;
  j["detail"] = v.detail;
  return j.dump();
}

namespace {

std::string summarize(const std::vector<Violation>& vs) {
  std::string s = std::to_string(vs.size()) + " constraint violation(s)";
  if (!vs.empty()) s += ", first: " + render(vs.front());
  return s;
}

}  // namespace

ValidationError::ValidationError(std::vector<Violation> violations)
    : Error(summarize(violations)), violations_(std::move(violations)) {}

}  // namespace eva
