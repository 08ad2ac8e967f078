#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace eva {

using NodeId = std::uint64_t;

/// Types a value can have. Cipher is an encrypted vector.
enum class ValueType : std::uint8_t { Cipher, Vector, Scalar, Integer };

/// Instruction opcodes. Relinearize, ModSwitch and Rescale are compiler-only.
/// Copy is the identity instruction kept for schema compatibility.
enum class OpCode : std::uint8_t {
  Negate,
  Add,
  Sub,
  Multiply,
  RotateLeft,
  RotateRight,
  Relinearize,
  ModSwitch,
  Rescale,
  Copy,
};

/// Object types of the serialized schema. IntegerConst is an extension used for
/// rotation step operands, which the schema has no type for.
enum class ObjectType : std::uint8_t {
  ScalarConst,
  ScalarPlain,
  ScalarCipher,
  VectorConst,
  VectorPlain,
  VectorCipher,
  IntegerConst,
};

enum class NodeKind : std::uint8_t { Constant, Input, Instruction };

std::string_view to_string(ValueType t);
std::string_view to_string(OpCode op);
std::string_view to_string(ObjectType t);
ValueType value_type_of(ObjectType t);

/// Number of parameters an opcode takes.
std::size_t arity(OpCode op);
/// True for the opcodes only the compiler may insert.
bool is_compiler_only(OpCode op);
bool is_binary_arith(OpCode op);  // Add, Sub, Multiply
bool is_rotation(OpCode op);

struct Node {
  NodeId id = 0;
  NodeKind kind = NodeKind::Instruction;
  OpCode op = OpCode::Copy;  // instructions only
  ValueType type = ValueType::Cipher;
  ObjectType object_type = ObjectType::VectorCipher;  // constants and inputs only
  double scale = 0.0;          // log2 of the fixed-point scale; constants and inputs only
  std::vector<double> value;   // constants only
  std::vector<NodeId> params;  // instructions only, ordered

  bool is_instruction() const { return kind == NodeKind::Instruction; }
  bool is_constant() const { return kind == NodeKind::Constant; }
  bool is_input() const { return kind == NodeKind::Input; }
  bool is_cipher() const { return type == ValueType::Cipher; }

  friend bool operator==(const Node&, const Node&) = default;
};

/// A designated program output: the node it reads and the desired output scale (log2).
struct Output {
  NodeId node = 0;
  double scale = 0.0;
  friend bool operator==(const Output&, const Output&) = default;
};

/// A consumer edge of a node: argument `arg` of `user`, or output slot `arg`
/// when `user == kOutputUser`.
struct Use {
  static constexpr NodeId kOutputUser = std::numeric_limits<NodeId>::max();
  NodeId user = 0;
  std::size_t arg = 0;
  bool is_output() const { return user == kOutputUser; }
  friend bool operator==(const Use&, const Use&) = default;
};

using UseMap = std::unordered_map<NodeId, std::vector<Use>>;

/// An EVA program: a DAG of constants, inputs and instructions over vectors of
/// a fixed power-of-two size, with an ordered list of outputs.
class Program {
 public:
  explicit Program(std::uint64_t vec_size = 1);

  std::uint64_t vec_size() const { return vec_size_; }

  NodeId add_constant(ObjectType type, std::vector<double> value, double scale);
  NodeId add_constant(ValueType type, std::vector<double> value, double scale);
  NodeId add_input(ObjectType type, double scale);
  NodeId add_input(ValueType type, double scale);
  /// Appends an instruction; its type is inferred from the operands.
  NodeId add_instruction(OpCode op, std::vector<NodeId> params);
  void add_output(NodeId node, double scale);

  /// Inserts a fully formed node with a caller-chosen id (used by the loader).
  void insert_node(Node node);

  bool contains(NodeId id) const { return nodes_.contains(id); }
  const Node& node(NodeId id) const;
  Node& mutable_node(NodeId id);
  std::size_t size() const { return nodes_.size(); }

  const std::vector<NodeId>& constants() const { return constants_; }
  const std::vector<NodeId>& inputs() const { return inputs_; }
  const std::vector<NodeId>& instructions() const { return insts_; }
  const std::vector<Output>& outputs() const { return outputs_; }
  std::vector<Output>& mutable_outputs() { return outputs_; }

  /// Removes an instruction that no longer has any consumer.
  void erase_instruction(NodeId id);

  /// All consumer edges, keyed by producer. Every node has an entry.
  UseMap uses() const;

  /// Nodes ordered so that every node follows its parameters. Deterministic:
  /// ties are broken by list order (constants, inputs, then instructions).
  /// Throws ProgramError on a cycle or a dangling reference.
  std::vector<NodeId> topological_order() const;

  /// Infers the result type of an instruction from its operands, checking arity
  /// and operand types. Throws ProgramError on mismatch.
  ValueType infer_type(OpCode op, std::span<const NodeId> params) const;

  /// Checks every structural invariant; throws ProgramError on the first failure.
  void check() const;

  NodeId next_id() const { return next_id_; }

  /// Same vec_size, same node set with equal fields, same outputs in order.
  friend bool operator==(const Program& a, const Program& b);

 private:
  NodeId fresh_id() { return next_id_++; }

  std::uint64_t vec_size_;
  std::unordered_map<NodeId, Node> nodes_;
  std::vector<NodeId> constants_;
  std::vector<NodeId> inputs_;
  std::vector<NodeId> insts_;
  std::vector<Output> outputs_;
  NodeId next_id_ = 0;
};

bool is_power_of_two(std::uint64_t v);

/// Repeats a value of length s_i (a power of two dividing vec_size) until it
/// has vec_size elements. Throws ProgramError otherwise.
std::vector<double> replicate(std::span<const double> value, std::uint64_t vec_size);

/// Replaces every short Vector constant by vec_size/s_i contiguous copies.
Program replicate_inputs(const Program& p);

/// Per node, the largest number of Multiply nodes with at least one Cipher
/// operand on any path from a root to that node (inclusive).
std::unordered_map<NodeId, int> multiplicative_depth(const Program& p);

}  // namespace eva
