#include "eva/executor.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <sstream>
#include <unordered_map>

#include "eva/analysis.hpp"
#include "eva/error.hpp"
#include "eva/rewrite.hpp"

namespace eva {

namespace {

using Clock = std::chrono::steady_clock;

/// Free list of vec_size buffers with a live count.
class BufferPool {
 public:
  BufferPool(std::size_t size, bool reuse) : size_(size), reuse_(reuse) {}

  std::vector<double> acquire() {
    std::vector<double> b;
    {
      std::lock_guard lock(mu_);
      if (!free_.empty()) {
        b = std::move(free_.back());
        free_.pop_back();
      }
      ++live_;
      peak_ = std::max(peak_, live_);
    }
    b.resize(size_);
    return b;
  }

  void release(std::vector<double>&& b) {
    if (!reuse_) return;
    std::lock_guard lock(mu_);
    --live_;
    free_.push_back(std::move(b));
  }

  std::size_t peak() const { return peak_; }

 private:
  std::size_t size_;
  bool reuse_;
  std::mutex mu_;
  std::vector<std::vector<double>> free_;
  std::size_t live_ = 0;
  std::size_t peak_ = 0;
};

struct Slot {
  std::vector<double> data;  // length vec_size, or 1 for Scalar/Integer values
  bool pooled = false;
  TraceEvent event;
};

double at(const std::vector<double>& v, std::size_t i) { return v.size() == 1 ? v[0] : v[i]; }

std::int64_t rotation_amount(const std::vector<double>& step, std::size_t n) {
  const double k = step.at(0);
  if (k != std::floor(k)) throw ExecutionError("rotation step is not an integer");
  const auto m = static_cast<std::int64_t>(n);
  return ((static_cast<std::int64_t>(k) % m) + m) % m;
}

}  // namespace

RunReport execute(const Program& p, const InputMap& inputs, const ExecOptions& opts) {
  const std::size_t vs = p.vec_size();
  const auto order = p.topological_order();
  std::unordered_map<NodeId, std::size_t> index;
  index.reserve(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) index[order[i]] = i;

  for (NodeId id : p.inputs()) {
    if (!inputs.contains(id)) throw ExecutionError("missing value for input " + std::to_string(id));
  }
  for (const auto& [id, v] : inputs) {
    if (!p.contains(id) || !p.node(id).is_input()) {
      throw ExecutionError("node " + std::to_string(id) + " is not an input");
    }
  }

  // Scales only feed quantization; input overrides replace declared scales.
  Program scaled = p;
  for (const auto& [id, v] : inputs) {
    if (v.scale) scaled.mutable_node(id).scale = *v.scale;
  }
  const NodeState<double> scales = opts.quantize ? compute_scales(scaled) : NodeState<double>{};

  std::vector<Slot> slots(order.size());
  BufferPool pool(vs, opts.reuse);
  std::mutex retire_mu;
  std::vector<RetireEvent> retired;
  std::atomic<std::size_t> executed{0};
  std::atomic<std::size_t> vector_nodes{0};
  const auto t0 = Clock::now();
  auto now_ns = [&] {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t0).count();
  };

  auto evaluate = [&](const Node& n, Slot& out) {
    const bool wide = n.type == ValueType::Cipher || n.type == ValueType::Vector;
    auto fresh = [&] {
      if (wide) {
        out.data = pool.acquire();
        out.pooled = true;
        vector_nodes.fetch_add(1, std::memory_order_relaxed);
      } else {
        out.data.assign(1, 0.0);
      }
    };
    auto arg = [&](std::size_t k) -> const std::vector<double>& {
      return slots[index.at(n.params[k])].data;
    };
    if (n.is_constant() || n.is_input()) {
      const std::vector<double>& src = n.is_constant() ? n.value : inputs.at(n.id).data;
      fresh();
      if (wide) {
        if (src.empty() || !is_power_of_two(src.size()) || src.size() > vs) {
          throw ExecutionError("node " + std::to_string(n.id) + ": value of length " +
                               std::to_string(src.size()) + " does not divide vec_size " +
                               std::to_string(vs));
        }
        for (std::size_t i = 0; i < vs; ++i) out.data[i] = src[i % src.size()];
      } else {
        if (src.size() != 1) {
          throw ExecutionError("node " + std::to_string(n.id) + ": scalar value must have one element");
        }
        out.data[0] = src[0];
      }
      return;
    }
    fresh();
    const std::size_t len = out.data.size();
    switch (n.op) {
      case OpCode::Negate: {
        const auto& a = arg(0);
        for (std::size_t i = 0; i < len; ++i) out.data[i] = -at(a, i);
        break;
      }
      case OpCode::Add: {
        const auto& a = arg(0);
        const auto& b = arg(1);
        for (std::size_t i = 0; i < len; ++i) out.data[i] = at(a, i) + at(b, i);
        break;
      }
      case OpCode::Sub: {
        const auto& a = arg(0);
        const auto& b = arg(1);
        for (std::size_t i = 0; i < len; ++i) out.data[i] = at(a, i) - at(b, i);
        break;
      }
      case OpCode::Multiply: {
        const auto& a = arg(0);
        const auto& b = arg(1);
        for (std::size_t i = 0; i < len; ++i) out.data[i] = at(a, i) * at(b, i);
        break;
      }
      case OpCode::RotateLeft:
      case OpCode::RotateRight: {
        const auto& a = arg(0);
        std::int64_t k = rotation_amount(arg(1), len);
        const auto m = static_cast<std::int64_t>(len);
        if (n.op == OpCode::RotateRight) k = (m - k) % m;
        for (std::size_t i = 0; i < len; ++i) out.data[i] = a[(i + static_cast<std::size_t>(k)) % len];
        break;
      }
      case OpCode::Rescale:
      case OpCode::ModSwitch:
      case OpCode::Relinearize:
      case OpCode::Copy: {
        const auto& a = arg(0);
        for (std::size_t i = 0; i < len; ++i) out.data[i] = at(a, i);
        break;
      }
    }
  };

  ParallelHooks hooks;
  hooks.visit = [&](NodeId id, std::size_t worker) {
    const Node& n = p.node(id);
    Slot& out = slots[index.at(id)];
    const std::int64_t start = opts.trace ? now_ns() : 0;
    if (opts.node_hook) opts.node_hook(id);
    evaluate(n, out);
    if (opts.quantize && n.type != ValueType::Integer) {
      const double f = std::exp2(scales.at(id));
      for (double& v : out.data) v = std::round(v * f) / f;
    }
    for (double v : out.data) {
      if (!std::isfinite(v)) {
        ExecutionError e("node " + std::to_string(id) + ": non-finite result");
        e.set_node(id);
        throw e;
      }
    }
    if (opts.trace) {
      const std::string op = n.is_instruction() ? std::string(to_string(n.op))
                             : n.is_input()     ? "INPUT"
                                                : "CONSTANT";
      out.event = {id, op, worker, start, now_ns()};
    }
    executed.fetch_add(1, std::memory_order_relaxed);
  };
  hooks.retire = [&](NodeId id) {
    Slot& s = slots[index.at(id)];
    if (s.pooled && opts.reuse) {
      pool.release(std::move(s.data));
      s.data.clear();
      s.pooled = false;
      if (opts.trace) {
        std::lock_guard lock(retire_mu);
        retired.push_back({id, now_ns()});
      }
    }
  };

  parallel_traverse(p, Direction::Forward, opts.threads, hooks);

  RunReport r;
  r.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  r.peak_buffers = pool.peak();
  r.vector_nodes = vector_nodes.load();
  r.nodes_executed = executed.load();
  const NodeState<double> out_scales = opts.quantize ? scales : compute_scales(scaled);
  for (const Output& o : p.outputs()) {
    const auto& d = slots[index.at(o.node)].data;
    std::vector<double> v(vs);
    for (std::size_t i = 0; i < vs; ++i) v[i] = at(d, i);
    r.outputs.push_back(std::move(v));
    r.output_scales.push_back(out_scales.at(o.node));
  }
  if (opts.trace) {
    for (const Slot& s : slots) r.trace.push_back(s.event);
    std::sort(r.trace.begin(), r.trace.end(),
              [](const TraceEvent& a, const TraceEvent& b) { return a.start_ns < b.start_ns; });
    std::sort(retired.begin(), retired.end(),
              [](const RetireEvent& a, const RetireEvent& b) { return a.time_ns < b.time_ns; });
    r.retired = std::move(retired);
  }
  return r;
}

std::string trace_csv(const RunReport& r) {
  std::ostringstream os;
  os << "event,node,op,thread,start_ns,end_ns\n";
  for (const TraceEvent& e : r.trace) {
    os << "exec," << e.node << ',' << e.op << ',' << e.thread << ',' << e.start_ns << ','
       << e.end_ns << '\n';
  }
  for (const RetireEvent& e : r.retired) os << "retire," << e.node << ",,," << e.time_ns << ",\n";
  return os.str();
}

std::size_t peak_concurrency(const std::vector<TraceEvent>& trace) {
  std::vector<std::pair<std::int64_t, int>> edges;
  for (const TraceEvent& e : trace) {
    edges.emplace_back(e.start_ns, 1);
    edges.emplace_back(e.end_ns, -1);
  }
  // An interval ending at t does not overlap one starting at t.
  std::sort(edges.begin(), edges.end());
  long cur = 0;
  long best = 0;
  for (const auto& [t, d] : edges) {
    cur += d;
    best = std::max(best, cur);
  }
  return static_cast<std::size_t>(best);
}

}  // namespace eva
