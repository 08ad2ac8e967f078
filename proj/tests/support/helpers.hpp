#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "eva/executor.hpp"
#include "eva/program.hpp"

namespace helpers {

inline std::size_t count_op(const eva::Program& p, eva::OpCode op) {
  std::size_t n = 0;
  for (eva::NodeId id : p.instructions()) n += p.node(id).op == op;
  return n;
}

/// Instructions reading `id`, in instruction-list order.
inline std::vector<eva::NodeId> users(const eva::Program& p, eva::NodeId id) {
  std::vector<eva::NodeId> out;
  for (eva::NodeId u : p.instructions()) {
    for (eva::NodeId q : p.node(u).params) {
      if (q == id) {
        out.push_back(u);
        break;
      }
    }
  }
  return out;
}

/// The single instruction reading `id`, or nullopt.
inline std::optional<eva::NodeId> sole_user(const eva::Program& p, eva::NodeId id) {
  auto u = users(p, id);
  if (u.size() != 1) return std::nullopt;
  return u[0];
}

/// Follows single-consumer links from `id` through ops in `through` and
/// returns the opcodes passed, e.g. {RELINEARIZE, RESCALE}.
inline std::vector<eva::OpCode> tail_ops(const eva::Program& p, eva::NodeId id) {
  std::vector<eva::OpCode> ops;
  while (auto u = sole_user(p, id)) {
    const auto op = p.node(*u).op;
    if (op != eva::OpCode::Relinearize && op != eva::OpCode::Rescale && op != eva::OpCode::ModSwitch) break;
    ops.push_back(op);
    id = *u;
  }
  return ops;
}

/// Random values in [-1, 1] for every input, sized to the input's declared kind.
inline eva::InputMap random_inputs(const eva::Program& p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  eva::InputMap in;
  for (eva::NodeId id : p.inputs()) {
    const auto& n = p.node(id);
    std::vector<double> v(n.type == eva::ValueType::Scalar ? 1 : p.vec_size());
    for (double& x : v) x = d(rng);
    in[id] = {v, std::nullopt};
  }
  return in;
}

inline std::map<eva::NodeId, std::vector<double>> plain(const eva::InputMap& in) {
  std::map<eva::NodeId, std::vector<double>> out;
  for (const auto& [id, v] : in) out[id] = v.data;
  return out;
}

}  // namespace helpers
