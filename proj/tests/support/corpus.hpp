// Exhaustive corpus of small programs over two cipher inputs.
//
// Programs are hash-consed expression DAGs: no two instructions compute the
// same expression and every instruction reaches the single output. Such a DAG
// is fully determined by the output expression, so the corpus is the set of
// expressions over {Add, Multiply, RotateLeft by 1} with at most `max_insts`
// distinct subexpressions. Add and Multiply operands are unordered.
#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <unordered_map>
#include <vector>

#include "eva/program.hpp"

namespace corpus {

enum class Op : std::uint8_t { Input, Add, Multiply, Rotate };

struct Expr {
  Op op = Op::Input;
  int a = -1;
  int b = -1;
};

class Table {
 public:
  Table() {
    exprs_.push_back({Op::Input, 0, -1});
    exprs_.push_back({Op::Input, 1, -1});
  }
  int intern(Op op, int a, int b) {
    if (op != Op::Rotate && a > b) std::swap(a, b);
    const std::uint64_t key = (std::uint64_t{static_cast<std::uint8_t>(op)} << 60) |
                              (static_cast<std::uint64_t>(a) << 30) | static_cast<std::uint64_t>(b + 1);
    auto [it, fresh] = ids_.try_emplace(key, static_cast<int>(exprs_.size()));
    if (fresh) exprs_.push_back({op, a, b});
    return it->second;
  }
  const Expr& at(int id) const { return exprs_.at(id); }

 private:
  std::vector<Expr> exprs_;
  std::unordered_map<std::uint64_t, int> ids_;
};

/// Output expressions of every DAG with 1..max_insts instructions, grouped by
/// instruction count.
inline std::vector<std::vector<int>> enumerate(Table& t, std::size_t max_insts) {
  std::vector<std::vector<int>> found(max_insts + 1);
  std::vector<int> nodes{0, 1};
  std::vector<int> uses{0, 0};

  std::function<void()> grow = [&] {
    const std::size_t insts = nodes.size() - 2;
    if (insts > 0) {
      std::size_t pending = 0;
      for (std::size_t i = 2; i < nodes.size(); ++i) pending += uses[i] == 0;
      if (pending == 1) found[insts].push_back(nodes.back());
      // A new instruction consumes at most two pending ones and adds itself.
      if (pending - 1 > max_insts - insts) return;
    }
    if (insts == max_insts) return;
    auto push = [&](Op op, int i, int j) {
      const int e = t.intern(op, nodes[i], j < 0 ? -1 : nodes[j]);
      if (std::find(nodes.begin(), nodes.end(), e) != nodes.end()) return;
      nodes.push_back(e);
      uses.push_back(0);
      ++uses[i];
      if (j >= 0) ++uses[j];
      grow();
      --uses[i];
      if (j >= 0) --uses[j];
      uses.pop_back();
      nodes.pop_back();
    };
    const int n = static_cast<int>(nodes.size());
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        push(Op::Add, i, j);
        push(Op::Multiply, i, j);
      }
      push(Op::Rotate, i, -1);
    }
  };
  grow();

  for (auto& f : found) {
    std::sort(f.begin(), f.end());
    f.erase(std::unique(f.begin(), f.end()), f.end());
  }
  return found;
}

/// Builds the program for an output expression. Input 0 and input 1 are
/// Cipher with the given scales; the output asks for `out_scale`.
inline eva::Program build(const Table& t, int root, std::uint64_t vec_size, double x_scale,
                          double y_scale, double out_scale) {
  eva::Program p(vec_size);
  std::map<int, eva::NodeId> made;
  made[0] = p.add_input(eva::ValueType::Cipher, x_scale);
  made[1] = p.add_input(eva::ValueType::Cipher, y_scale);
  eva::NodeId step = 0;
  bool have_step = false;
  std::function<eva::NodeId(int)> go = [&](int id) -> eva::NodeId {
    if (auto it = made.find(id); it != made.end()) return it->second;
    const Expr& e = t.at(id);
    eva::NodeId n = 0;
    switch (e.op) {
      case Op::Add: n = p.add_instruction(eva::OpCode::Add, {go(e.a), go(e.b)}); break;
      case Op::Multiply: n = p.add_instruction(eva::OpCode::Multiply, {go(e.a), go(e.b)}); break;
      case Op::Rotate: {
        const eva::NodeId a = go(e.a);
        if (!have_step) {
          step = p.add_constant(eva::ValueType::Integer, {1.0}, 0);
          have_step = true;
        }
        n = p.add_instruction(eva::OpCode::RotateLeft, {a, step});
        break;
      }
      case Op::Input: break;
    }
    made[id] = n;
    return n;
  };
  p.add_output(go(root), out_scale);
  return p;
}

}  // namespace corpus
