#include <doctest.h>

#include <cmath>

#include "eva/error.hpp"
#include "eva/generator.hpp"
#include "eva/params.hpp"
#include "eva/passes.hpp"
#include "eva/samples.hpp"

using namespace eva;

TEST_CASE("bit sizes for x^2 y^3") {
  const Program p = compile(samples::x2y3()).program;
  // Special prime, two chain primes, then 2^(90+30) split into 60 + 60.
  CHECK(select_parameters(p) == std::vector<int>{60, 60, 60, 60, 60});
  CHECK(chain_length_formula(p) == 5);
}

TEST_CASE("bit sizes for x^2 + x") {
  const Program p = compile(samples::x2_plus_x()).program;
  CHECK(select_parameters(p) == std::vector<int>{60, 60, 30});
  CHECK(chain_length_formula(p) == 3);
}

TEST_CASE("the remainder factor is last") {
  Program p(4);
  const NodeId x = p.add_input(ValueType::Cipher, 50);
  p.add_output(x, 25);
  CHECK(select_parameters(p) == std::vector<int>{60, 60, 15});
  CHECK(select_parameters(p, 40) == std::vector<int>{40, 40, 35});
}

TEST_CASE("the longest output decides") {
  Program p(4);
  const NodeId x = p.add_input(ValueType::Cipher, 30);
  const NodeId y = p.add_input(ValueType::Cipher, 30);
  p.add_output(x, 10);
  p.add_output(y, 60);
  CHECK(select_parameters(p) == std::vector<int>{60, 60, 30});
}

TEST_CASE("ModSwitch positions take the divisor used elsewhere") {
  Program p(4);
  const NodeId x = p.add_input(ValueType::Cipher, 100);
  const NodeId y = p.add_input(ValueType::Cipher, 100);
  const NodeId d = p.add_constant(ValueType::Scalar, {std::ldexp(1.0, 40)}, 0);
  const NodeId rx = p.add_instruction(OpCode::Rescale, {x, d});
  const NodeId my = p.add_instruction(OpCode::ModSwitch, {y});
  p.add_output(rx, 20);
  p.add_output(my, 0);
  // Both outputs need three primes; output 1 ({M} + 2^100, M resolved to 40)
  // needs more bits than output 0 ({40} + 2^80).
  CHECK(select_parameters(p) == std::vector<int>{60, 40, 60, 40});
  CHECK(chain_length_formula(p) == 4);

  Program q(4);
  const NodeId z = q.add_input(ValueType::Cipher, 30);
  q.add_output(q.add_instruction(OpCode::ModSwitch, {z}), 10);
  CHECK(select_parameters(q) == std::vector<int>{60, 60, 40});
}

TEST_CASE("an output that needs a fractional bit count is an error") {
  Program p(4);
  p.add_output(p.add_input(ValueType::Cipher, 30.5), 20);
  CHECK_THROWS_AS(select_parameters(p), CompileError);
}

TEST_CASE("chain length formula agrees with parameter selection") {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const CompilationResult r = compile(random_program(seed));
    CHECK(chain_length_formula(r.program) == static_cast<int>(r.bit_sizes.size()));
    int sum = 0;
    for (int b : r.bit_sizes) sum += b;
    CHECK(r.log_q == sum - 60);
    CHECK(r.r == static_cast<int>(r.bit_sizes.size()));
  }
}

TEST_CASE("rotation steps are normalized to left rotations modulo vec_size") {
  Program p(8);
  const NodeId x = p.add_input(ValueType::Cipher, 30);
  auto rot = [&](OpCode op, double k) {
    return p.add_instruction(op, {x, p.add_constant(ValueType::Integer, {k}, 0)});
  };
  rot(OpCode::RotateLeft, 1);
  rot(OpCode::RotateLeft, 9);
  rot(OpCode::RotateRight, 1);
  rot(OpCode::RotateLeft, -2);
  rot(OpCode::RotateRight, 8);
  CHECK(select_rotation_steps(p) == std::set<std::int64_t>{0, 1, 6, 7});
}

TEST_CASE("sobel needs one key per filter offset") {
  const auto steps = select_rotation_steps(samples::sobel(64));
  CHECK(steps == std::set<std::int64_t>{0, 1, 2, 64, 65, 66, 128, 129, 130});
}

TEST_CASE("polynomial degree stub") {
  CHECK(poly_degree_stub(109) == 8192);
  CHECK(poly_degree_stub(218) == 8192);
  CHECK(poly_degree_stub(219) == 16384);
  CHECK(poly_degree_stub(438) == 16384);
  CHECK(poly_degree_stub(881) == 32768);
  CHECK(poly_degree_stub(882) == 65536);
  CHECK(compile(samples::x2y3()).poly_degree == 16384);
}
