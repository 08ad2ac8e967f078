#include "eva/generator.hpp"

#include <array>
#include <random>

namespace eva {

Program random_program(std::uint64_t seed, const RandomProgramOptions& opts) {
  std::mt19937_64 rng(seed);
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  auto real = [&] { return std::uniform_real_distribution<double>(-1.0, 1.0)(rng); };

  Program p(opts.vec_size);
  constexpr std::array kCipherScales = {20.0, 30.0, 40.0, 60.0};
  const double cipher_scale = kCipherScales[pick(kCipherScales.size())];
  auto plain_scale = [&] { return std::min(cipher_scale, 10.0 * static_cast<double>(1 + pick(4))); };

  std::vector<NodeId> pool;
  for (std::size_t i = 0; i < std::max<std::size_t>(1, opts.cipher_inputs); ++i) {
    pool.push_back(p.add_input(ValueType::Cipher, cipher_scale));
  }
  if (opts.plain_operands) {
    pool.push_back(p.add_input(ValueType::Vector, plain_scale()));
    std::vector<double> v(std::size_t{1} << pick(3));
    for (double& e : v) e = real();
    pool.push_back(p.add_constant(ValueType::Vector, std::move(v), plain_scale()));
    pool.push_back(p.add_constant(ValueType::Scalar, {real()}, plain_scale()));
  }

  // Operands favour recent nodes so that programs get some depth.
  auto operand = [&] {
    const std::size_t n = pool.size();
    const std::size_t recent = std::min<std::size_t>(n, 4);
    return pick(2) ? pool[n - 1 - pick(recent)] : pool[pick(n)];
  };

  std::vector<OpCode> ops = {OpCode::Add, OpCode::Sub, OpCode::Multiply, OpCode::Multiply,
                             OpCode::Negate};
  if (opts.rotations) {
    ops.push_back(OpCode::RotateLeft);
    ops.push_back(OpCode::RotateRight);
  }

  std::size_t made = 0;
  while (made < opts.instructions) {
    const OpCode op = ops[pick(ops.size())];
    std::vector<NodeId> params;
    if (is_rotation(op)) {
      const NodeId a = operand();
      if (p.node(a).type == ValueType::Scalar) continue;
      const auto step = static_cast<double>(1 + pick(opts.vec_size > 1 ? opts.vec_size - 1 : 1));
      params = {a, p.add_constant(ValueType::Integer, {step}, 0)};
    } else if (op == OpCode::Negate) {
      params = {operand()};
    } else {
      params = {operand(), operand()};
    }
    pool.push_back(p.add_instruction(op, std::move(params)));
    ++made;
  }

  const UseMap uses = p.uses();
  constexpr std::array kOutScales = {10.0, 20.0, 30.0};
  for (NodeId id : p.instructions()) {
    if (uses.at(id).empty()) p.add_output(id, kOutScales[pick(kOutScales.size())]);
  }
  if (p.outputs().empty()) p.add_output(pool.front(), kOutScales[pick(kOutScales.size())]);
  return p;
}

}  // namespace eva
