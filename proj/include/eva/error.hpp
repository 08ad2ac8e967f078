#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace eva {

/// Base class for every error raised by the toolchain.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;

  /// Node the error was raised at, when known.
  std::optional<std::uint64_t> node() const noexcept { return node_; }
  void set_node(std::uint64_t node) noexcept { node_ = node; }

 private:
  std::optional<std::uint64_t> node_;
};

/// Malformed program text or inputs file.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Structurally invalid program: dangling reference, cycle, arity or type mismatch.
class ProgramError : public Error {
 public:
  using Error::Error;
};

/// Opcode that is not accepted at this point (SUM, NORMALIZE_SCALE, or a
/// compiler-only opcode in an input program).
class UnsupportedOpcode : public ProgramError {
 public:
  using ProgramError::ProgramError;
};

/// A compilation step could not be carried out (e.g. a scale gap wider than s_f).
class CompileError : public Error {
 public:
  using Error::Error;
};

/// Execution failed: missing input, bad input length, non-finite value.
class ExecutionError : public Error {
 public:
  using Error::Error;
};

/// Broken internal invariant. Seeing one of these is a bug.
class InternalError : public Error {
 public:
  using Error::Error;
};

/// Error of no more specific class raised while visiting a node.
class NodeError : public Error {
 public:
  NodeError(std::uint64_t node, const std::string& what)
      : Error("node " + std::to_string(node) + ": " + what) {
    set_node(node);
  }
};

/// Must be called from a catch block handling an Error: rethrows it as the same
/// class with the node id attached, unless it already carries one.
[[noreturn]] void rethrow_at_node(std::uint64_t node);

}  // namespace eva
