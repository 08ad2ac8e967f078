#include "eva/rewrite.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <deque>
#include <exception>
#include <mutex>
#include <thread>
#include <unordered_set>

namespace eva {

std::vector<NodeId> traversal_order(const Program& p, Direction dir) {
  std::vector<NodeId> order = p.topological_order();
  if (dir == Direction::Backward) std::reverse(order.begin(), order.end());
  return order;
}

std::size_t traverse(const Program& p, Direction dir, const std::function<void(const Node&)>& visit) {
  std::size_t count = 0;
  for (NodeId id : traversal_order(p, dir)) {
    try {
      visit(p.node(id));
    } catch (const Error&) {
      rethrow_at_node(id);
    }
    ++count;
  }
  return count;
}

void parallel_traverse(const Program& p, Direction dir, std::size_t threads,
                       const ParallelHooks& hooks) {
  if (threads == 0) threads = 1;
  const std::vector<NodeId> order = p.topological_order();
  const std::size_t n = order.size();
  std::unordered_map<NodeId, std::size_t> index;
  index.reserve(n);
  for (std::size_t i = 0; i < n; ++i) index[order[i]] = i;

  // succ: nodes released by visiting i; pred: nodes whose retirement waits on i.
  std::vector<std::vector<std::size_t>> succ(n), pred(n);
  std::vector<std::size_t> outputs_reading(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const Node& node = p.node(order[i]);
    std::vector<std::size_t> params;
    for (NodeId q : node.params) params.push_back(index.at(q));
    std::sort(params.begin(), params.end());
    params.erase(std::unique(params.begin(), params.end()), params.end());
    for (std::size_t q : params) {
      if (dir == Direction::Forward) {
        succ[q].push_back(i);
        pred[i].push_back(q);
      } else {
        succ[i].push_back(q);
        pred[q].push_back(i);
      }
    }
  }
  for (const Output& o : p.outputs()) ++outputs_reading[index.at(o.node)];

  std::vector<std::atomic<std::size_t>> waiting(n);
  std::vector<std::atomic<std::size_t>> unvisited_dependents(n);
  for (std::size_t i = 0; i < n; ++i) {
    waiting[i].store(0, std::memory_order_relaxed);
    unvisited_dependents[i].store(succ[i].size(), std::memory_order_relaxed);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t s : succ[i]) waiting[s].fetch_add(1, std::memory_order_relaxed);
  }

  std::mutex mu;
  std::condition_variable cv;
  std::deque<std::size_t> ready;
  std::size_t remaining = n;
  bool failed = false;
  std::exception_ptr error;

  for (std::size_t i = 0; i < n; ++i) {
    if (waiting[i].load(std::memory_order_relaxed) == 0) ready.push_back(i);
  }

  auto worker = [&](std::size_t worker_id) {
    for (;;) {
      std::size_t i;
      {
        std::unique_lock lock(mu);
        cv.wait(lock, [&] { return failed || remaining == 0 || !ready.empty(); });
        if (failed || remaining == 0) return;
        i = ready.front();
        ready.pop_front();
      }
      try {
        if (hooks.visit) hooks.visit(order[i], worker_id);
        std::vector<std::size_t> released;
        for (std::size_t s : succ[i]) {
          if (waiting[s].fetch_sub(1, std::memory_order_acq_rel) == 1) released.push_back(s);
        }
        if (succ[i].empty() && outputs_reading[i] == 0 && hooks.retire) hooks.retire(order[i]);
        for (std::size_t q : pred[i]) {
          if (unvisited_dependents[q].fetch_sub(1, std::memory_order_acq_rel) == 1 &&
              outputs_reading[q] == 0 && hooks.retire) {
            hooks.retire(order[q]);
          }
        }
        std::lock_guard lock(mu);
        for (std::size_t r : released) ready.push_back(r);
        --remaining;
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failed) error = std::current_exception();
        failed = true;
      }
      cv.notify_all();
    }
  };

  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker, t);
  }
  if (error) std::rethrow_exception(error);
  if (remaining != 0) throw InternalError("parallel traversal stalled");
}

GraphEditor::GraphEditor(Program p) : program_(std::move(p)), uses_(program_.uses()) {}

const std::vector<Use>& GraphEditor::uses(NodeId id) const {
  auto it = uses_.find(id);
  if (it == uses_.end()) throw InternalError("no use list for node " + std::to_string(id));
  return it->second;
}

NodeId GraphEditor::add_constant(ValueType type, std::vector<double> value, double scale) {
  const NodeId id = program_.add_constant(type, std::move(value), scale);
  uses_[id];
  created_.push_back(id);
  return id;
}

NodeId GraphEditor::create(OpCode op, std::vector<NodeId> params) {
  const NodeId id = program_.add_instruction(op, params);
  uses_[id];
  for (std::size_t k = 0; k < params.size(); ++k) add_use(params[k], {id, k});
  created_.push_back(id);
  return id;
}

NodeId GraphEditor::source_of(const Use& use) const {
  if (use.is_output()) return program_.outputs().at(use.arg).node;
  return program_.node(use.user).params.at(use.arg);
}

void GraphEditor::add_use(NodeId source, Use use) { uses_[source].push_back(use); }

void GraphEditor::remove_use(NodeId source, const Use& use) {
  auto& list = uses_.at(source);
  auto it = std::find(list.begin(), list.end(), use);
  if (it == list.end()) throw InternalError("stale use list");
  list.erase(it);
}

void GraphEditor::redirect(const Use& use, NodeId source) {
  const NodeId old = source_of(use);
  remove_use(old, use);
  if (use.is_output()) {
    program_.mutable_outputs().at(use.arg).node = source;
  } else {
    program_.mutable_node(use.user).params.at(use.arg) = source;
  }
  add_use(source, use);
}

NodeId GraphEditor::splice_after(NodeId n, OpCode op, std::span<const NodeId> extra,
                                 const std::function<bool(const Use&)>& select) {
  std::vector<Use> moving;
  for (const Use& u : uses(n)) {
    if (!select || select(u)) moving.push_back(u);
  }
  std::vector<NodeId> params{n};
  params.insert(params.end(), extra.begin(), extra.end());
  const NodeId m = create(op, std::move(params));
  for (const Use& u : moving) redirect(u, m);
  return m;
}

NodeId GraphEditor::insert_on_edge(const Use& use, OpCode op, std::span<const NodeId> extra) {
  const NodeId source = source_of(use);
  std::vector<NodeId> params{source};
  params.insert(params.end(), extra.begin(), extra.end());
  const NodeId m = create(op, std::move(params));
  redirect(use, m);
  return m;
}

void GraphEditor::bypass(NodeId n) {
  const Node& node = program_.node(n);
  if (!node.is_instruction()) throw InternalError("bypass of a non-instruction");
  const NodeId source = node.params.at(0);
  const std::vector<Use> moving = uses(n);
  for (const Use& u : moving) redirect(u, source);
  const std::vector<NodeId> params = node.params;
  for (std::size_t k = 0; k < params.size(); ++k) remove_use(params[k], {n, k});
  uses_.erase(n);
  program_.erase_instruction(n);
}

Program GraphEditor::release() && { return std::move(program_); }

Program rewrite(Program p, Direction dir, const RewriteRule& rule, RewriteOptions opts,
                RewriteStats* stats) {
  const std::vector<NodeId> order = traversal_order(p, dir);
  GraphEditor editor(std::move(p));
  std::unordered_set<NodeId> visited;
  visited.reserve(order.size());
  RewriteStats local;

  auto ready = [&](NodeId id) {
    if (dir == Direction::Forward) {
      for (NodeId q : editor.node(id).params) {
        if (!visited.contains(q)) return false;
      }
    } else {
      for (const Use& u : editor.uses(id)) {
        if (!u.is_output() && !visited.contains(u.user)) return false;
      }
    }
    return true;
  };

  std::deque<NodeId> work(order.begin(), order.end());
  while (!work.empty()) {
    const NodeId id = work.front();
    work.pop_front();
    if (!ready(id)) {
      throw InternalError("rewrite visited node " + std::to_string(id) +
                          " before its dependencies");
    }
    const std::size_t before = editor.created().size();
    bool changed = false;
    try {
      changed = rule(editor, id);
    } catch (const Error&) {
      rethrow_at_node(id);
    }
    visited.insert(id);
    ++local.visited;
    if (changed) ++local.changed;
    const auto& created = editor.created();
    std::vector<NodeId> fresh(created.begin() + static_cast<std::ptrdiff_t>(before), created.end());
    if (opts.revisit_inserted) {
      // Inserted nodes are visited next, in an order that respects the pass
      // direction among themselves.
      if (dir == Direction::Backward) std::reverse(fresh.begin(), fresh.end());
      for (auto it = fresh.rbegin(); it != fresh.rend(); ++it) work.push_front(*it);
    } else {
      for (NodeId f : fresh) visited.insert(f);
    }
  }
  Program out = std::move(editor).release();
  try {
    out.check();
  } catch (const ProgramError& e) {
    throw InternalError(std::string("rewrite produced an invalid program: ") + e.what());
  }
  if (stats) *stats = local;
  return out;
}

Program rewrite_to_fixpoint(Program p, Direction dir, const std::function<RewriteRule()>& make_rule,
                            std::size_t max_passes, std::size_t* passes) {
  for (std::size_t i = 1; i <= max_passes; ++i) {
    RewriteStats stats;
    p = rewrite(std::move(p), dir, make_rule(), {}, &stats);
    if (stats.changed == 0) {
      if (passes) *passes = i;
      return p;
    }
  }
  throw InternalError("rewrite did not reach quiescence after " + std::to_string(max_passes) +
                      " passes");
}

}  // namespace eva
