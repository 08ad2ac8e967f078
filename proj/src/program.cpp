#include "eva/program.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <unordered_set>

#include "eva/error.hpp"

namespace eva {

std::string_view to_string(ValueType t) {
  switch (t) {
    case ValueType::Cipher: return "Cipher";
    case ValueType::Vector: return "Vector";
    case ValueType::Scalar: return "Scalar";
    case ValueType::Integer: return "Integer";
  }
  return "?";
}

std::string_view to_string(OpCode op) {
  switch (op) {
    case OpCode::Negate: return "NEGATE";
    case OpCode::Add: return "ADD";
    case OpCode::Sub: return "SUB";
    case OpCode::Multiply: return "MULTIPLY";
    case OpCode::RotateLeft: return "ROTATE_LEFT";
    case OpCode::RotateRight: return "ROTATE_RIGHT";
    case OpCode::Relinearize: return "RELINEARIZE";
    case OpCode::ModSwitch: return "MOD_SWITCH";
    case OpCode::Rescale: return "RESCALE";
    case OpCode::Copy: return "COPY";
  }
  return "?";
}

std::string_view to_string(ObjectType t) {
  switch (t) {
    case ObjectType::ScalarConst: return "SCALAR_CONST";
    case ObjectType::ScalarPlain: return "SCALAR_PLAIN";
    case ObjectType::ScalarCipher: return "SCALAR_CIPHER";
    case ObjectType::VectorConst: return "VECTOR_CONST";
    case ObjectType::VectorPlain: return "VECTOR_PLAIN";
    case ObjectType::VectorCipher: return "VECTOR_CIPHER";
    case ObjectType::IntegerConst: return "INTEGER_CONST";
  }
  return "?";
}

ValueType value_type_of(ObjectType t) {
  switch (t) {
    case ObjectType::ScalarConst:
    case ObjectType::ScalarPlain: return ValueType::Scalar;
    case ObjectType::VectorConst:
    case ObjectType::VectorPlain: return ValueType::Vector;
    case ObjectType::ScalarCipher:
    case ObjectType::VectorCipher: return ValueType::Cipher;
    case ObjectType::IntegerConst: return ValueType::Integer;
  }
  return ValueType::Cipher;
}

namespace {

ObjectType default_object_type(ValueType t, NodeKind kind) {
  switch (t) {
    case ValueType::Cipher: return ObjectType::VectorCipher;
    case ValueType::Vector:
      return kind == NodeKind::Input ? ObjectType::VectorPlain : ObjectType::VectorConst;
    case ValueType::Scalar:
      return kind == NodeKind::Input ? ObjectType::ScalarPlain : ObjectType::ScalarConst;
    case ValueType::Integer: return ObjectType::IntegerConst;
  }
  return ObjectType::VectorCipher;
}

}  // namespace

std::size_t arity(OpCode op) {
  switch (op) {
    case OpCode::Negate:
    case OpCode::Relinearize:
    case OpCode::ModSwitch:
    case OpCode::Copy: return 1;
    default: return 2;
  }
}

bool is_compiler_only(OpCode op) {
  return op == OpCode::Relinearize || op == OpCode::ModSwitch || op == OpCode::Rescale;
}

bool is_binary_arith(OpCode op) {
  return op == OpCode::Add || op == OpCode::Sub || op == OpCode::Multiply;
}

bool is_rotation(OpCode op) { return op == OpCode::RotateLeft || op == OpCode::RotateRight; }

bool is_power_of_two(std::uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

Program::Program(std::uint64_t vec_size) : vec_size_(vec_size) {
  if (!is_power_of_two(vec_size)) {
    throw ProgramError("vec_size " + std::to_string(vec_size) + " is not a power of two");
  }
}

NodeId Program::add_constant(ObjectType type, std::vector<double> value, double scale) {
  Node n;
  n.id = fresh_id();
  n.kind = NodeKind::Constant;
  n.object_type = type;
  n.type = value_type_of(type);
  n.scale = scale;
  n.value = std::move(value);
  insert_node(std::move(n));
  return next_id_ - 1;
}

NodeId Program::add_constant(ValueType type, std::vector<double> value, double scale) {
  return add_constant(default_object_type(type, NodeKind::Constant), std::move(value), scale);
}

NodeId Program::add_input(ObjectType type, double scale) {
  Node n;
  n.id = fresh_id();
  n.kind = NodeKind::Input;
  n.object_type = type;
  n.type = value_type_of(type);
  n.scale = scale;
  insert_node(std::move(n));
  return next_id_ - 1;
}

NodeId Program::add_input(ValueType type, double scale) {
  return add_input(default_object_type(type, NodeKind::Input), scale);
}

NodeId Program::add_instruction(OpCode op, std::vector<NodeId> params) {
  Node n;
  n.kind = NodeKind::Instruction;
  n.op = op;
  n.type = infer_type(op, params);
  n.params = std::move(params);
  n.id = fresh_id();
  const NodeId id = n.id;
  insert_node(std::move(n));
  return id;
}

void Program::add_output(NodeId node, double scale) {
  if (!contains(node)) {
    throw ProgramError("output references unknown node " + std::to_string(node));
  }
  outputs_.push_back({node, scale});
}

void Program::insert_node(Node node) {
  const NodeId id = node.id;
  if (id == Use::kOutputUser) throw ProgramError("node id is reserved");
  if (nodes_.contains(id)) throw ProgramError("duplicate node id " + std::to_string(id));
  switch (node.kind) {
    case NodeKind::Constant:
      if (node.type == ValueType::Cipher) {
        throw ProgramError("constant " + std::to_string(id) + " cannot have Cipher type");
      }
      constants_.push_back(id);
      break;
    case NodeKind::Input: inputs_.push_back(id); break;
    case NodeKind::Instruction: insts_.push_back(id); break;
  }
  nodes_.emplace(id, std::move(node));
  next_id_ = std::max(next_id_, id + 1);
}

const Node& Program::node(NodeId id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw ProgramError("unknown node " + std::to_string(id));
  return it->second;
}

Node& Program::mutable_node(NodeId id) {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw ProgramError("unknown node " + std::to_string(id));
  return it->second;
}

void Program::erase_instruction(NodeId id) {
  const Node& n = node(id);
  if (!n.is_instruction()) throw ProgramError("erase_instruction on non-instruction");
  insts_.erase(std::remove(insts_.begin(), insts_.end(), id), insts_.end());
  nodes_.erase(id);
}

UseMap Program::uses() const {
  UseMap uses;
  uses.reserve(nodes_.size());
  for (const auto& [id, n] : nodes_) uses[id];
  for (NodeId id : insts_) {
    const Node& n = nodes_.at(id);
    for (std::size_t k = 0; k < n.params.size(); ++k) {
      auto it = uses.find(n.params[k]);
      if (it == uses.end()) {
        throw ProgramError("node " + std::to_string(id) + " references unknown node " +
                           std::to_string(n.params[k]));
      }
      it->second.push_back({id, k});
    }
  }
  for (std::size_t k = 0; k < outputs_.size(); ++k) {
    auto it = uses.find(outputs_[k].node);
    if (it == uses.end()) {
      throw ProgramError("output references unknown node " + std::to_string(outputs_[k].node));
    }
    it->second.push_back({Use::kOutputUser, k});
  }
  return uses;
}

std::vector<NodeId> Program::topological_order() const {
  // Ids are dense enough to index plain arrays.
  const std::size_t n_ids = next_id_;
  std::vector<std::size_t> pending(n_ids, 0);
  std::vector<std::size_t> position(n_ids, 0);
  // Users of every node in one flat array, grouped by producer.
  std::vector<std::size_t> first(n_ids + 1, 0);
  for (NodeId id : insts_) {
    const Node& n = nodes_.at(id);
    for (NodeId q : n.params) {
      if (q >= n_ids || !nodes_.contains(q)) {
        throw ProgramError("node " + std::to_string(id) + " references unknown node " +
                           std::to_string(q));
      }
      ++first[q + 1];
    }
  }
  for (std::size_t i = 0; i < n_ids; ++i) first[i + 1] += first[i];
  std::vector<NodeId> users(first[n_ids]);
  std::vector<std::size_t> fill(first.begin(), first.end() - 1);
  for (std::size_t i = 0; i < insts_.size(); ++i) {
    const NodeId id = insts_[i];
    position[id] = i;
    const Node& n = nodes_.at(id);
    pending[id] = n.params.size();
    for (NodeId q : n.params) users[fill[q]++] = id;
  }
  std::deque<NodeId> ready;
  for (NodeId id : constants_) ready.push_back(id);
  for (NodeId id : inputs_) ready.push_back(id);
  for (NodeId id : insts_) {
    if (pending[id] == 0) ready.push_back(id);
  }
  std::vector<NodeId> order;
  order.reserve(nodes_.size());
  std::vector<NodeId> released;
  // Instructions become ready in list order among those released together,
  // which keeps the result stable across runs.
  while (!ready.empty()) {
    const NodeId id = ready.front();
    ready.pop_front();
    order.push_back(id);
    released.clear();
    for (std::size_t k = first[id]; k < first[id + 1]; ++k) {
      if (--pending[users[k]] == 0) released.push_back(users[k]);
    }
    std::sort(released.begin(), released.end(),
              [&](NodeId a, NodeId b) { return position[a] < position[b]; });
    for (NodeId r : released) ready.push_back(r);
  }
  if (order.size() != nodes_.size()) throw ProgramError("program graph contains a cycle");
  return order;
}

ValueType Program::infer_type(OpCode op, std::span<const NodeId> params) const {
  const std::string_view name = to_string(op);
  if (params.size() != arity(op)) {
    throw ProgramError(std::string(name) + " expects " + std::to_string(arity(op)) + " arguments, got " +
                       std::to_string(params.size()));
  }
  auto type_of = [&](std::size_t k) { return node(params[k]).type; };
  switch (op) {
    case OpCode::Negate:
    case OpCode::Copy:
      if (type_of(0) == ValueType::Integer) throw ProgramError(std::string(name) + " of an Integer value");
      return type_of(0);
    case OpCode::Relinearize:
    case OpCode::ModSwitch:
      if (type_of(0) != ValueType::Cipher) throw ProgramError(std::string(name) + " requires a Cipher argument");
      return ValueType::Cipher;
    case OpCode::Rescale: {
      if (type_of(0) != ValueType::Cipher) throw ProgramError(std::string(name) + " requires a Cipher argument");
      const Node& d = node(params[1]);
      if (!d.is_constant() || d.type != ValueType::Scalar) {
        throw ProgramError(std::string(name) + " divisor must be a Scalar constant");
      }
      return ValueType::Cipher;
    }
    case OpCode::RotateLeft:
    case OpCode::RotateRight: {
      if (type_of(0) != ValueType::Cipher && type_of(0) != ValueType::Vector) {
        throw ProgramError(std::string(name) + " requires a Cipher or Vector argument");
      }
      const Node& s = node(params[1]);
      if (!s.is_constant() || s.type != ValueType::Integer) {
        throw ProgramError(std::string(name) + " step must be an Integer constant");
      }
      return type_of(0);
    }
    case OpCode::Add:
    case OpCode::Sub:
    case OpCode::Multiply: {
      const ValueType a = type_of(0), b = type_of(1);
      if (a == ValueType::Integer || b == ValueType::Integer) {
        throw ProgramError(std::string(name) + " of an Integer value");
      }
      if (a == ValueType::Cipher || b == ValueType::Cipher) return ValueType::Cipher;
      if (a == ValueType::Vector || b == ValueType::Vector) return ValueType::Vector;
      return ValueType::Scalar;
    }
  }
  throw ProgramError("unknown opcode");
}

void Program::check() const {
  for (const auto& [id, n] : nodes_) {
    if (!std::isfinite(n.scale)) {
      throw ProgramError("node " + std::to_string(id) + " has a non-finite scale");
    }
    for (double v : n.value) {
      if (!std::isfinite(v)) {
        throw ProgramError("constant " + std::to_string(id) + " holds a non-finite element");
      }
    }
  }
  for (NodeId id : constants_) {
    const Node& n = nodes_.at(id);
    if (n.type == ValueType::Vector) {
      if (!is_power_of_two(n.value.size()) || n.value.size() > vec_size_) {
        throw ProgramError("constant " + std::to_string(id) + " has length " +
                           std::to_string(n.value.size()) +
                           ", expected a power of two <= vec_size");
      }
    } else if (n.value.size() != 1) {
      throw ProgramError("constant " + std::to_string(id) + " must hold exactly one element");
    }
  }
  for (NodeId id : insts_) {
    const Node& n = nodes_.at(id);
    for (NodeId p : n.params) {
      if (!contains(p)) {
        throw ProgramError("node " + std::to_string(id) + " references unknown node " +
                           std::to_string(p));
      }
    }
    const ValueType t = infer_type(n.op, n.params);
    if (t != n.type) {
      throw ProgramError("node " + std::to_string(id) + " has type " +
                         std::string(to_string(n.type)) + ", expected " +
                         std::string(to_string(t)));
    }
  }
  for (const Output& o : outputs_) {
    if (!contains(o.node)) {
      throw ProgramError("output references unknown node " + std::to_string(o.node));
    }
    if (node(o.node).type == ValueType::Integer) {
      throw ProgramError("output " + std::to_string(o.node) + " is an Integer value");
    }
  }
  (void)topological_order();
}

bool operator==(const Program& a, const Program& b) {
  if (a.vec_size_ != b.vec_size_ || a.outputs_ != b.outputs_ || a.nodes_ != b.nodes_) {
    return false;
  }
  auto same_set = [](std::vector<NodeId> x, std::vector<NodeId> y) {
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    return x == y;
  };
  return same_set(a.constants_, b.constants_) && same_set(a.inputs_, b.inputs_) &&
         same_set(a.insts_, b.insts_);
}

std::vector<double> replicate(std::span<const double> value, std::uint64_t vec_size) {
  const std::size_t len = value.size();
  if (!is_power_of_two(len)) {
    throw ProgramError("value length " + std::to_string(len) + " is not a power of two");
  }
  if (len > vec_size) {
    throw ProgramError("value length " + std::to_string(len) + " exceeds vec_size " +
                       std::to_string(vec_size));
  }
  std::vector<double> out;
  out.reserve(vec_size);
  while (out.size() < vec_size) out.insert(out.end(), value.begin(), value.end());
  return out;
}

Program replicate_inputs(const Program& p) {
  Program out = p;
  for (NodeId id : out.constants()) {
    Node& n = out.mutable_node(id);
    if (n.type == ValueType::Vector && n.value.size() < p.vec_size()) {
      n.value = replicate(n.value, p.vec_size());
    }
  }
  return out;
}

std::unordered_map<NodeId, int> multiplicative_depth(const Program& p) {
  std::unordered_map<NodeId, int> depth;
  for (NodeId id : p.topological_order()) {
    const Node& n = p.node(id);
    int d = 0;
    bool cipher_operand = false;
    for (NodeId q : n.params) {
      d = std::max(d, depth.at(q));
      cipher_operand = cipher_operand || p.node(q).is_cipher();
    }
    if (n.is_instruction() && n.op == OpCode::Multiply && cipher_operand) ++d;
    depth[id] = d;
  }
  return depth;
}

}  // namespace eva
