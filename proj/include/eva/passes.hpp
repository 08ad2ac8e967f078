#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "eva/program.hpp"

namespace eva {

/// Largest scale over all constants and inputs (log2); 0 for an empty program.
double default_waterline(const Program& p);

/// After every cipher Multiply, splices as many Rescale-by-s_f nodes as keep
/// the scale at or above the waterline `sw` (default_waterline when unset).
Program waterline_rescale(const Program& p, int sf_bits = 60, std::optional<double> sw = {});

/// After every Multiply with a cipher operand, splices one Rescale by the
/// smaller operand scale, capped at s_f. Baseline only.
Program always_rescale(const Program& p, int sf_bits = 60);

/// At each cipher-cipher Add/Sub/Multiply whose operands sit at different
/// levels, inserts ModSwitch nodes on the lower operand's edge.
Program lazy_modswitch(const Program& p);

/// Inserts ModSwitch nodes as close to the roots as possible so that every
/// cipher-cipher Add/Sub/Multiply sees operands at equal levels. Requires all
/// Rescale nodes to share one divisor; throws CompileError otherwise.
Program eager_modswitch(const Program& p);

/// Baseline fixup for mixed rescale divisors: builds one global modulus list
/// and pads edges with ModSwitch nodes so that every chain is a prefix of it.
Program align_modswitch(const Program& p);

/// At each cipher-cipher Add/Sub with unequal operand scales, multiplies the
/// lower operand by a constant 1 carrying the scale ratio. Throws
/// CompileError when the ratio exceeds 2^sf_bits.
Program match_scale(const Program& p, int sf_bits = 60);

/// Splices a Relinearize after every Multiply of two cipher operands.
Program relinearize(const Program& p);

enum class RescaleStrategy { Waterline, Always };
enum class ModSwitchStrategy { Eager, Lazy, Align };

struct CompileOptions {
  int sf_bits = 60;
  /// Waterline (log2); default_waterline when unset.
  std::optional<double> waterline;
  /// Desired output scale (log2) by output node id, replacing the program's.
  std::map<NodeId, double> output_scales;
  RescaleStrategy rescale = RescaleStrategy::Waterline;
  ModSwitchStrategy modswitch = ModSwitchStrategy::Eager;
};

struct CompilationResult {
  Program program;
  /// log2 of each coefficient-modulus prime, special prime first.
  std::vector<int> bit_sizes;
  std::set<std::int64_t> rotation_steps;
  /// Number of primes including the special prime.
  int r = 0;
  /// Sum of bit sizes without the special prime.
  int log_q = 0;
  /// Reporting-only stub; see poly_degree_stub.
  std::uint64_t poly_degree = 0;
};

/// Rescale, modswitch, match-scale and relinearize passes, then validation
/// and parameter selection. Throws UnsupportedOpcode for compiler-only
/// opcodes in `p` and ValidationError if the result breaks a constraint.
CompilationResult compile(const Program& p, const CompileOptions& opts = {});

/// The always-rescale pipeline with global modulus alignment.
CompilationResult compile_baseline(const Program& p, CompileOptions opts = {});

/// Parameters for an already compiled program (validates it first).
CompilationResult analyze_compiled(Program p, int sf_bits = 60);

}  // namespace eva
