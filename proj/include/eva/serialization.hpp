#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "eva/executor.hpp"
#include "eva/program.hpp"

namespace eva {

/// Current version of the program text format.
inline constexpr int kFormatVersion = 1;

/// Parses the canonical program text format (a JSON document whose field
/// names follow the EVA protocol schema: vec_size, constants, inputs, outputs,
/// insts; entries carry id, type, scale, op_code, args, elements).
///
/// The result has passed Program::check(). Throws ParseError for malformed
/// text, UnsupportedOpcode for SUM/NORMALIZE_SCALE, ProgramError otherwise.
Program load_program(std::string_view text);

/// Writes the canonical text form. Instructions are emitted in topological
/// order, so output is byte-identical for equal programs.
std::string save_program(const Program& p);

Program load_program_file(const std::filesystem::path& path);
void save_program_file(const Program& p, const std::filesystem::path& path);

/// Reads a whole file; throws ParseError when it cannot be opened.
std::string read_text_file(const std::filesystem::path& path);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

/// Parses an inputs file: one `id: [v1, v2, ...]` line per input, optionally
/// followed by `scale=<log2>`. Blank lines and lines starting with # are skipped.
InputMap parse_inputs(std::string_view text);

/// `[v1, v2, ...]` with shortest round-trip numbers.
std::string format_values(const std::vector<double>& values);

}  // namespace eva
