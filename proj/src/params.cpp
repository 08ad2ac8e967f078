#include "eva/params.hpp"

#include <cmath>
#include <numeric>

#include "eva/analysis.hpp"
#include "eva/error.hpp"
#include "eva/serialization.hpp"

namespace eva {

namespace {

struct OutputNeed {
  std::vector<int> chain;
  std::vector<int> factors;
};

std::vector<OutputNeed> output_needs(const Program& p, int sf_bits) {
  if (sf_bits < 1) throw CompileError("s_f must be at least 2^1");
  const auto chains = compute_chains(p);
  const auto scales = compute_scales(p);

  // A ModSwitch position takes the divisor any other chain has there.
  std::vector<std::optional<double>> known;
  for (const auto& [id, c] : chains) {
    if (!c) continue;
    const auto& e = c->elements();
    if (known.size() < e.size()) known.resize(e.size());
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (e[i] != kModSwitchMark && !known[i]) known[i] = e[i];
    }
  }

  std::vector<OutputNeed> needs;
  for (const Output& o : p.outputs()) {
    OutputNeed need;
    if (p.node(o.node).is_cipher()) {
      const auto& c = chains.at(o.node);
      if (!c) {
        throw CompileError("output node " + std::to_string(o.node) +
                           " has no conforming rescale chain");
      }
      for (std::size_t i = 0; i < c->size(); ++i) {
        double d = c->elements()[i];
        if (d == kModSwitchMark) d = known[i].value_or(sf_bits);
        need.chain.push_back(static_cast<int>(d));
      }
    }
    const double total = scales.at(o.node) + o.scale;
    if (total < 1 || total != std::floor(total)) {
      throw CompileError("output node " + std::to_string(o.node) + " needs 2^" +
                         format_double(total) + ", which is not a positive integer power of two");
    }
    auto bits = static_cast<long long>(total);
    while (bits > sf_bits) {
      need.factors.push_back(sf_bits);
      bits -= sf_bits;
    }
    need.factors.push_back(static_cast<int>(bits));
    needs.push_back(std::move(need));
  }
  return needs;
}

}  // namespace

std::vector<int> select_parameters(const Program& p, int sf_bits) {
  const auto needs = output_needs(p, sf_bits);
  std::vector<int> bits{sf_bits};
  // Longest need wins; among equally long ones the largest total, so that the
  // chosen primes also cover the other outputs.
  auto key = [](const OutputNeed& n) {
    const int total = std::accumulate(n.chain.begin(), n.chain.end(), 0) +
                      std::accumulate(n.factors.begin(), n.factors.end(), 0);
    return std::pair{n.chain.size() + n.factors.size(), total};
  };
  const OutputNeed* best = nullptr;
  for (const auto& n : needs) {
    if (!best || key(n) > key(*best)) best = &n;
  }
  if (best) {
    bits.insert(bits.end(), best->chain.begin(), best->chain.end());
    bits.insert(bits.end(), best->factors.begin(), best->factors.end());
  }
  return bits;
}

std::set<std::int64_t> select_rotation_steps(const Program& p) {
  std::set<std::int64_t> steps;
  const auto vs = static_cast<std::int64_t>(p.vec_size());
  for (NodeId id : p.instructions()) {
    const Node& n = p.node(id);
    if (!is_rotation(n.op)) continue;
    const Node& k = p.node(n.params.at(1));
    const double v = k.value.at(0);
    if (v != std::floor(v)) throw ProgramError("rotation step is not an integer");
    std::int64_t s = static_cast<std::int64_t>(v) % vs;
    if (n.op == OpCode::RotateRight) s = -s;
    steps.insert(((s % vs) + vs) % vs);
  }
  return steps;
}

int chain_length_formula(const Program& p, int sf_bits) {
  const auto scales = compute_scales(p);
  const auto chains = compute_chains(p);
  int r = 1;
  for (const Output& o : p.outputs()) {
    std::size_t len = 0;
    if (p.node(o.node).is_cipher() && chains.at(o.node)) len = chains.at(o.node)->size();
    const double total = scales.at(o.node) + o.scale;
    const auto factors = static_cast<int>(std::ceil(total / sf_bits));
    r = std::max(r, 1 + static_cast<int>(len) + factors);
  }
  const auto bits = select_parameters(p, sf_bits);
  if (static_cast<int>(bits.size()) != r) {
    throw InternalError("chain length formula gives " + std::to_string(r) +
                        " but parameter selection produced " + std::to_string(bits.size()) +
                        " primes");
  }
  return r;
}

std::uint64_t poly_degree_stub(int total_bits) {
  // Largest total modulus per degree at the commonly used 128-bit level.
  if (total_bits <= 218) return 8192;
  if (total_bits <= 438) return 16384;
  if (total_bits <= 881) return 32768;
  return 65536;
}

}  // namespace eva
