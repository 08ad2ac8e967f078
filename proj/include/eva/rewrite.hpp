#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "eva/error.hpp"
#include "eva/program.hpp"

namespace eva {

/// Forward visits a node after all of its parameters; Backward after all of
/// its consumers.
enum class Direction { Forward, Backward };

/// Per-node state slots filled in by a traversal.
template <class State>
class NodeState {
 public:
  bool has(NodeId id) const { return slots_.contains(id); }
  const State& at(NodeId id) const {
    auto it = slots_.find(id);
    if (it == slots_.end()) throw InternalError("no state for node " + std::to_string(id));
    return it->second;
  }
  void set(NodeId id, State s) { slots_.insert_or_assign(id, std::move(s)); }
  std::size_t size() const { return slots_.size(); }
  auto begin() const { return slots_.begin(); }
  auto end() const { return slots_.end(); }

 private:
  std::unordered_map<NodeId, State> slots_;
};

/// Node ids in the order a traversal in `dir` visits them.
std::vector<NodeId> traversal_order(const Program& p, Direction dir);

/// Visits every node once in dependency order. The visitor computes a node's
/// state from the states of the nodes visited before it. Errors thrown by the
/// visitor are rethrown with the node id attached.
template <class State, class Visitor>
NodeState<State> traverse(const Program& p, Direction dir, Visitor&& visit) {
  NodeState<State> states;
  for (NodeId id : traversal_order(p, dir)) {
    try {
      states.set(id, visit(p.node(id), std::as_const(states)));
    } catch (const Error&) {
      rethrow_at_node(id);
    }
  }
  return states;
}

/// Visits every node once in dependency order, discarding state. Returns the
/// number of visits.
std::size_t traverse(const Program& p, Direction dir, const std::function<void(const Node&)>& visit);

/// Hooks for a parallel traversal. `visit` runs on a worker thread and may
/// only write state owned by the visited node. `retire` is called once every
/// node that depends on the given node has been visited; nodes read by an
/// output never retire.
struct ParallelHooks {
  std::function<void(NodeId, std::size_t worker)> visit;
  std::function<void(NodeId)> retire;
};

/// Dependency-respecting traversal on `threads` workers pulling from a shared
/// ready set. The first exception thrown by a hook stops scheduling and is
/// rethrown after all workers have joined.
void parallel_traverse(const Program& p, Direction dir, std::size_t threads,
                       const ParallelHooks& hooks);

/// Mutable view of a program with consumer lists kept up to date, used by
/// rewrite rules. Rules may only touch the visited node, its parameters and
/// its consumers.
class GraphEditor {
 public:
  explicit GraphEditor(Program p);

  const Program& program() const { return program_; }
  const Node& node(NodeId id) const { return program_.node(id); }
  const std::vector<Use>& uses(NodeId id) const;

  NodeId add_constant(ValueType type, std::vector<double> value, double scale);

  /// Creates `op(n, extra...)` and redirects the consumers of `n` accepted by
  /// `select` (all of them by default) to the new node.
  NodeId splice_after(NodeId n, OpCode op, std::span<const NodeId> extra = {},
                      const std::function<bool(const Use&)>& select = {});

  /// Creates `op(source, extra...)` where `source` is the node currently read
  /// by `use`, and makes `use` read the new node instead.
  NodeId insert_on_edge(const Use& use, OpCode op, std::span<const NodeId> extra = {});

  /// Makes `use` read `source`.
  void redirect(const Use& use, NodeId source);

  /// Removes instruction `n`, making its consumers read its first parameter.
  void bypass(NodeId n);

  /// Nodes created so far, in creation order.
  const std::vector<NodeId>& created() const { return created_; }

  Program release() &&;

 private:
  NodeId source_of(const Use& use) const;
  void add_use(NodeId source, Use use);
  void remove_use(NodeId source, const Use& use);
  NodeId create(OpCode op, std::vector<NodeId> params);

  Program program_;
  UseMap uses_;
  std::vector<NodeId> created_;
};

/// A rewrite rule: inspects the visited node and may edit its neighbourhood.
/// Returns true when it changed the graph.
using RewriteRule = std::function<bool(GraphEditor&, NodeId)>;

struct RewriteOptions {
  /// Visit nodes the rule inserts. None of the shipped rules need this.
  bool revisit_inserted = false;
};

struct RewriteStats {
  std::size_t visited = 0;
  std::size_t changed = 0;
};

/// Applies `rule` once at every node of `p` in `dir` order. The result is
/// checked for acyclicity and type consistency; a violation is an InternalError.
Program rewrite(Program p, Direction dir, const RewriteRule& rule, RewriteOptions opts = {},
                RewriteStats* stats = nullptr);

/// Repeats fresh single passes until one of them changes nothing. Throws
/// InternalError after `max_passes` passes without quiescence.
Program rewrite_to_fixpoint(Program p, Direction dir, const std::function<RewriteRule()>& make_rule,
                            std::size_t max_passes = 64, std::size_t* passes = nullptr);

}  // namespace eva
