#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "eva/program.hpp"

namespace eva {

/// Data supplied for one input node. `scale` (log2) replaces the input's
/// declared scale; it only matters in quantized mode.
struct InputValue {
  std::vector<double> data;
  std::optional<double> scale;
};

using InputMap = std::map<NodeId, InputValue>;

struct ExecOptions {
  std::size_t threads = 1;
  /// Snap every node's data to its fixed-point grid round(v * 2^s) / 2^s.
  bool quantize = false;
  /// Return buffers to a pool once all consumers have run.
  bool reuse = true;
  /// Record per-node start/end times.
  bool trace = false;
  /// Called on the worker thread right before a node is evaluated, inside its
  /// traced interval. For tests.
  std::function<void(NodeId)> node_hook;
};

struct TraceEvent {
  NodeId node = 0;
  std::string op;
  std::size_t thread = 0;
  std::int64_t start_ns = 0;
  std::int64_t end_ns = 0;
};

struct RetireEvent {
  NodeId node = 0;
  std::int64_t time_ns = 0;
};

struct RunReport {
  /// Decoded output vectors, ordered as Program::outputs().
  std::vector<std::vector<double>> outputs;
  /// Scale (log2) carried by each output.
  std::vector<double> output_scales;
  double wall_ms = 0;
  /// Largest number of vec_size buffers alive at once.
  std::size_t peak_buffers = 0;
  /// Nodes that hold a vec_size buffer (constants and inputs included).
  std::size_t vector_nodes = 0;
  std::size_t nodes_executed = 0;
  std::vector<TraceEvent> trace;
  std::vector<RetireEvent> retired;
};

/// Reference execution under the identity scheme: encryption is the identity,
/// Rescale/ModSwitch/Relinearize/Copy leave data unchanged, rotations are
/// circular. Short Vector/Cipher inputs are replicated up to vec_size. Throws
/// ExecutionError for a missing input, a bad input length or a non-finite result.
RunReport execute(const Program& p, const InputMap& inputs, const ExecOptions& opts = {});

/// Trace as CSV: `event,node,op,thread,start_ns,end_ns`, with retire rows
/// carrying the retire time in start_ns.
std::string trace_csv(const RunReport& r);

/// Largest number of trace intervals open at the same instant.
std::size_t peak_concurrency(const std::vector<TraceEvent>& trace);

}  // namespace eva
