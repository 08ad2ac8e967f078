#pragma once

#include <cstdint>

#include "eva/program.hpp"

namespace eva {

struct RandomProgramOptions {
  std::size_t instructions = 8;
  std::uint64_t vec_size = 16;
  std::size_t cipher_inputs = 2;
  /// Add a Vector input, a Vector constant and a Scalar constant as operands.
  bool plain_operands = true;
  bool rotations = true;
};

/// A valid input program drawn from a seeded mt19937_64. Cipher inputs share
/// one scale that is also the largest root scale, so the compiled program
/// never needs a scale correction wider than s_f. Every node without a
/// consumer becomes an output.
Program random_program(std::uint64_t seed, const RandomProgramOptions& opts = {});

}  // namespace eva
