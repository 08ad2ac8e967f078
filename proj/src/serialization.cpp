#include "eva/serialization.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "eva/error.hpp"

namespace eva {

using nlohmann::ordered_json;

namespace {

constexpr std::array kObjectTypes = {
    ObjectType::ScalarConst,  ObjectType::ScalarPlain,  ObjectType::ScalarCipher,
    ObjectType::VectorConst,  ObjectType::VectorPlain,  ObjectType::VectorCipher,
    ObjectType::IntegerConst,
};

constexpr std::array kOpCodes = {
    OpCode::Negate,      OpCode::Add,       OpCode::Sub,     OpCode::Multiply,
    OpCode::RotateLeft,  OpCode::RotateRight, OpCode::Relinearize, OpCode::ModSwitch,
    OpCode::Rescale,     OpCode::Copy,
};

ObjectType parse_object_type(const std::string& s) {
  for (ObjectType t : kObjectTypes) {
    if (to_string(t) == s) return t;
  }
  throw ParseError("unknown object type '" + s + "'");
}

OpCode parse_opcode(const std::string& s) {
  if (s == "SUM" || s == "NORMALIZE_SCALE") {
    throw UnsupportedOpcode("unsupported opcode " + s);
  }
  for (OpCode op : kOpCodes) {
    if (to_string(op) == s) return op;
  }
  throw ParseError("unknown opcode '" + s + "'");
}

const ordered_json& field(const ordered_json& obj, const char* name) {
  if (!obj.is_object()) throw ParseError(std::string("expected an object holding '") + name + "'");
  auto it = obj.find(name);
  if (it == obj.end()) throw ParseError(std::string("missing field '") + name + "'");
  return *it;
}

const ordered_json& optional_array(const ordered_json& obj, const char* name) {
  static const ordered_json empty = ordered_json::array();
  auto it = obj.find(name);
  if (it == obj.end()) return empty;
  if (!it->is_array()) throw ParseError(std::string("field '") + name + "' must be a list");
  return *it;
}

NodeId read_id(const ordered_json& v) {
  if (!v.is_number_unsigned()) throw ParseError("node id must be a non-negative integer");
  return v.get<NodeId>();
}

double read_number(const ordered_json& v, const char* what) {
  if (!v.is_number()) throw ParseError(std::string(what) + " must be a number");
  return v.get<double>();
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) throw InternalError("cannot format number");
  std::string s(buf.data(), end);
  return s;
}

Program load_program(std::string_view text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text.begin(), text.end());
  } catch (const ordered_json::parse_error& e) {
    throw ParseError(std::string("malformed program text: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("program document must be an object");
  if (auto it = doc.find("version"); it != doc.end()) {
    if (!it->is_number_integer() || it->get<int>() != kFormatVersion) {
      throw ParseError("unsupported format version");
    }
  }
  const ordered_json& vs = field(doc, "vec_size");
  if (!vs.is_number_unsigned()) throw ParseError("vec_size must be a positive integer");
  const auto vec_size = vs.get<std::uint64_t>();
  if (!is_power_of_two(vec_size)) {
    throw ProgramError("vec_size " + std::to_string(vec_size) + " is not a power of two");
  }
  Program p(vec_size);

  try {
    for (const auto& c : optional_array(doc, "constants")) {
      Node n;
      n.id = read_id(field(c, "id"));
      n.kind = NodeKind::Constant;
      n.object_type = parse_object_type(field(c, "type").get<std::string>());
      n.type = value_type_of(n.object_type);
      n.scale = read_number(field(c, "scale"), "scale");
      for (const auto& e : field(c, "elements")) n.value.push_back(read_number(e, "element"));
      p.insert_node(std::move(n));
    }
    for (const auto& in : optional_array(doc, "inputs")) {
      Node n;
      n.id = read_id(field(in, "id"));
      n.kind = NodeKind::Input;
      n.object_type = parse_object_type(field(in, "type").get<std::string>());
      if (n.object_type == ObjectType::IntegerConst) throw ParseError("inputs cannot be Integer");
      n.type = value_type_of(n.object_type);
      n.scale = read_number(field(in, "scale"), "scale");
      p.insert_node(std::move(n));
    }
    // Instruction types depend on operand types, so they are inferred after all
    // nodes exist.
    std::vector<NodeId> inst_ids;
    for (const auto& inst : optional_array(doc, "insts")) {
      Node n;
      n.id = read_id(field(inst, "id"));
      n.kind = NodeKind::Instruction;
      n.op = parse_opcode(field(inst, "op_code").get<std::string>());
      for (const auto& a : field(inst, "args")) n.params.push_back(read_id(a));
      if (n.params.size() != arity(n.op)) {
        throw ProgramError("node " + std::to_string(n.id) + ": " + std::string(to_string(n.op)) +
                           " expects " + std::to_string(arity(n.op)) + " arguments, got " +
                           std::to_string(n.params.size()));
      }
      inst_ids.push_back(n.id);
      p.insert_node(std::move(n));
    }
    for (const auto& o : optional_array(doc, "outputs")) {
      p.add_output(read_id(field(o, "id")), read_number(field(o, "scale"), "scale"));
    }
    for (NodeId id : inst_ids) {
      for (NodeId q : p.node(id).params) {
        if (!p.contains(q)) {
          throw ProgramError("node " + std::to_string(id) + " references unknown node " +
                             std::to_string(q));
        }
      }
    }
    for (NodeId id : p.topological_order()) {
      Node& n = p.mutable_node(id);
      if (n.is_instruction()) n.type = p.infer_type(n.op, n.params);
    }
  } catch (const ordered_json::exception& e) {
    throw ParseError(std::string("malformed program text: ") + e.what());
  }
  p.check();
  return p;
}

std::string save_program(const Program& p) {
  // Numbers are written by hand so the text is exactly the shortest
  // round-trip form of each double.
  std::ostringstream os;
  auto id_list = [&](const std::vector<NodeId>& ids) {
    os << '[';
    for (std::size_t i = 0; i < ids.size(); ++i) os << (i ? ", " : "") << ids[i];
    os << ']';
  };
  os << "{\n  \"version\": " << kFormatVersion << ",\n  \"vec_size\": " << p.vec_size() << ",\n";

  os << "  \"constants\": [";
  for (std::size_t i = 0; i < p.constants().size(); ++i) {
    const Node& n = p.node(p.constants()[i]);
    os << (i ? ",\n" : "\n") << "    {\"id\": " << n.id << ", \"type\": \""
       << to_string(n.object_type) << "\", \"scale\": " << format_double(n.scale)
       << ", \"elements\": [";
    for (std::size_t k = 0; k < n.value.size(); ++k) {
      os << (k ? ", " : "") << format_double(n.value[k]);
    }
    os << "]}";
  }
  os << (p.constants().empty() ? "],\n" : "\n  ],\n");

  os << "  \"inputs\": [";
  for (std::size_t i = 0; i < p.inputs().size(); ++i) {
    const Node& n = p.node(p.inputs()[i]);
    os << (i ? ",\n" : "\n") << "    {\"id\": " << n.id << ", \"type\": \""
       << to_string(n.object_type) << "\", \"scale\": " << format_double(n.scale) << "}";
  }
  os << (p.inputs().empty() ? "],\n" : "\n  ],\n");

  os << "  \"outputs\": [";
  for (std::size_t i = 0; i < p.outputs().size(); ++i) {
    const Output& o = p.outputs()[i];
    os << (i ? ",\n" : "\n") << "    {\"id\": " << o.node
       << ", \"scale\": " << format_double(o.scale) << "}";
  }
  os << (p.outputs().empty() ? "],\n" : "\n  ],\n");

  os << "  \"insts\": [";
  bool first = true;
  for (NodeId id : p.topological_order()) {
    const Node& n = p.node(id);
    if (!n.is_instruction()) continue;
    os << (first ? "\n" : ",\n") << "    {\"id\": " << n.id << ", \"op_code\": \""
       << to_string(n.op) << "\", \"args\": ";
    id_list(n.params);
    os << "}";
    first = false;
  }
  os << (first ? "]\n" : "\n  ]\n") << "}\n";
  return os.str();
}

InputMap parse_inputs(std::string_view text) {
  InputMap out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    auto fail = [&](const std::string& why) {
      throw ParseError("inputs line " + std::to_string(line_no) + ": " + why);
    };
    const auto colon = line.find(':');
    const auto open = line.find('[');
    const auto close = line.rfind(']');
    if (colon == std::string::npos || open == std::string::npos || close == std::string::npos ||
        open < colon || close < open) {
      fail("expected `id: [v1, v2, ...]`");
    }
    NodeId id = 0;
    {
      std::string head = line.substr(0, colon);
      const auto a = head.find_first_not_of(" \t");
      const auto b = head.find_last_not_of(" \t");
      if (a == std::string::npos) fail("missing input id");
      head = head.substr(a, b - a + 1);
      auto [ptr, ec] = std::from_chars(head.data(), head.data() + head.size(), id);
      if (ec != std::errc() || ptr != head.data() + head.size()) fail("bad input id '" + head + "'");
    }
    InputValue v;
    try {
      const auto list = ordered_json::parse(line.substr(open, close - open + 1));
      for (const auto& e : list) v.data.push_back(read_number(e, "value"));
    } catch (const ordered_json::exception&) {
      fail("malformed value list");
    }
    std::string rest = line.substr(close + 1);
    const auto a = rest.find_first_not_of(" \t\r");
    if (a != std::string::npos) {
      rest = rest.substr(a, rest.find_last_not_of(" \t\r") - a + 1);
      if (rest.rfind("scale=", 0) != 0) fail("unexpected text '" + rest + "'");
      double scale = 0;
      const std::string num = rest.substr(6);
      auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), scale);
      if (ec != std::errc() || ptr != num.data() + num.size()) fail("bad scale '" + num + "'");
      v.scale = scale;
    }
    if (out.contains(id)) fail("input " + std::to_string(id) + " given twice");
    out.emplace(id, std::move(v));
  }
  return out;
}

std::string format_values(const std::vector<double>& values) {
  std::string s = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) s += ", ";
    s += format_double(values[i]);
  }
  return s + "]";
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Program load_program_file(const std::filesystem::path& path) {
  return load_program(read_text_file(path));
}

void save_program_file(const Program& p, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path.string());
  out << save_program(p);
}

}  // namespace eva
