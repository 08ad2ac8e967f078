#pragma once

#include <cstdint>
#include <set>
#include <vector>

#include "eva/program.hpp"

namespace eva {

/// Coefficient-modulus bit sizes for a validated program: the special prime
/// (s_f) first, then the chain of the output that needs the longest modulus,
/// then the s_f-sized factors of that output's scale times its desired scale.
/// Throws CompileError when an output's scale is not a positive integer
/// number of bits, or an output chain is not conforming.
std::vector<int> select_parameters(const Program& p, int sf_bits = 60);

/// Distinct rotation steps, all expressed as left rotations in [0, vec_size).
std::set<std::int64_t> select_rotation_steps(const Program& p);

/// Closed form max over outputs of 1 + |c_o| + ceil(log2(scale(o) * s_o) / log2 s_f).
/// Throws InternalError when it disagrees with select_parameters.
int chain_length_formula(const Program& p, int sf_bits = 60);

/// Polynomial modulus degree for a total modulus of `total_bits`. A stub for
/// reporting only: it is not a security certification.
std::uint64_t poly_degree_stub(int total_bits);

}  // namespace eva
