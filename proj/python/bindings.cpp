#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "eva/error.hpp"
#include "eva/executor.hpp"
#include "eva/passes.hpp"
#include "eva/serialization.hpp"
#include "eva/validator.hpp"

namespace py = pybind11;

namespace {

eva::OpCode opcode_from(const std::string& name) {
  for (int i = 0; i <= static_cast<int>(eva::OpCode::Copy); ++i) {
    const auto op = static_cast<eva::OpCode>(i);
    if (eva::to_string(op) == name) return op;
  }
  throw eva::ParseError("unknown opcode " + name);
}

eva::ValueType type_from(const std::string& name) {
  if (name == "cipher") return eva::ValueType::Cipher;
  if (name == "vector") return eva::ValueType::Vector;
  if (name == "scalar") return eva::ValueType::Scalar;
  if (name == "integer") return eva::ValueType::Integer;
  throw eva::ParseError("unknown value type " + name);
}

py::dict result_dict(const eva::CompilationResult& r) {
  py::dict d;
  d["program"] = r.program;
  d["bits"] = r.bit_sizes;
  d["rotations"] = r.rotation_steps;
  d["r"] = r.r;
  d["log_q"] = r.log_q;
  d["poly_degree_stub"] = r.poly_degree;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "EVA compiler core";

  auto base = py::register_exception<eva::Error>(m, "Error");
  py::register_exception<eva::ParseError>(m, "ParseError", base.ptr());
  auto program_error = py::register_exception<eva::ProgramError>(m, "ProgramError", base.ptr());
  py::register_exception<eva::UnsupportedOpcode>(m, "UnsupportedOpcode", program_error.ptr());
  py::register_exception<eva::CompileError>(m, "CompileError", base.ptr());
  py::register_exception<eva::ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<eva::ExecutionError>(m, "ExecutionError", base.ptr());
  py::register_exception<eva::InternalError>(m, "InternalError", base.ptr());

  py::class_<eva::Program>(m, "Program")
      .def(py::init<std::uint64_t>(), py::arg("vec_size") = 1)
      .def_property_readonly("vec_size", &eva::Program::vec_size)
      .def("input", [](eva::Program& p, const std::string& type, double scale) {
        return p.add_input(type_from(type), scale);
      }, py::arg("type"), py::arg("scale"))
      .def("constant", [](eva::Program& p, const std::string& type, std::vector<double> value,
                          double scale) { return p.add_constant(type_from(type), std::move(value), scale); },
           py::arg("type"), py::arg("value"), py::arg("scale"))
      .def("instruction", [](eva::Program& p, const std::string& op, std::vector<eva::NodeId> params) {
        return p.add_instruction(opcode_from(op), std::move(params));
      }, py::arg("op"), py::arg("params"))
      .def("output", &eva::Program::add_output, py::arg("node"), py::arg("scale"))
      .def_property_readonly("inputs", &eva::Program::inputs)
      .def_property_readonly("instructions", &eva::Program::instructions)
      .def_property_readonly("outputs", [](const eva::Program& p) {
        std::vector<std::pair<eva::NodeId, double>> out;
        for (const auto& o : p.outputs()) out.emplace_back(o.node, o.scale);
        return out;
      })
      .def("opcode", [](const eva::Program& p, eva::NodeId id) {
        const eva::Node& n = p.node(id);
        return n.is_instruction() ? std::string(eva::to_string(n.op)) : std::string();
      })
      .def("__len__", &eva::Program::size)
      .def("__eq__", [](const eva::Program& a, const eva::Program& b) { return a == b; });

  m.def("loads", &eva::load_program, py::arg("text"));
  m.def("dumps", &eva::save_program, py::arg("program"));
  m.def("load", [](const std::string& path) { return eva::load_program_file(path); }, py::arg("path"));
  m.def("save", [](const eva::Program& p, const std::string& path) { eva::save_program_file(p, path); },
        py::arg("program"), py::arg("path"));

  m.def("compile", [](const eva::Program& p, int sf, std::optional<double> sw,
                      std::map<eva::NodeId, double> output_scales, const std::string& pipeline) {
    eva::CompileOptions opts;
    opts.sf_bits = sf;
    opts.waterline = sw;
    opts.output_scales = std::move(output_scales);
    if (pipeline == "baseline") {
      opts.rescale = eva::RescaleStrategy::Always;
      opts.modswitch = eva::ModSwitchStrategy::Align;
    } else if (pipeline == "lazy") {
      opts.modswitch = eva::ModSwitchStrategy::Lazy;
    } else if (pipeline != "waterline") {
      throw eva::ParseError("unknown pipeline " + pipeline);
    }
    return result_dict(eva::compile(p, opts));
  }, py::arg("program"), py::arg("sf") = 60, py::arg("sw") = py::none(),
     py::arg("output_scales") = std::map<eva::NodeId, double>{}, py::arg("pipeline") = "waterline");

  m.def("params", [](const eva::Program& p, int sf) { return result_dict(eva::analyze_compiled(p, sf)); },
        py::arg("program"), py::arg("sf") = 60);

  m.def("validate", [](const eva::Program& p, int sf) {
    std::vector<std::string> out;
    for (const auto& v : eva::validate(p, sf)) out.push_back(eva::render(v));
    return out;
  }, py::arg("program"), py::arg("sf") = 60);

  m.def("execute", [](const eva::Program& p, const std::map<eva::NodeId, std::vector<double>>& inputs,
                      std::size_t threads, bool quantize) {
    eva::InputMap in;
    for (const auto& [id, data] : inputs) in[id] = eva::InputValue{data, std::nullopt};
    eva::ExecOptions opts;
    opts.threads = threads;
    opts.quantize = quantize;
    eva::RunReport r;
    {
      py::gil_scoped_release release;
      r = eva::execute(p, in, opts);
    }
    return r.outputs;
  }, py::arg("program"), py::arg("inputs"), py::arg("threads") = 1, py::arg("quantize") = false);
}
