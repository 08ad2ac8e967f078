// evac: compile, validate, run and inspect EVA programs.
//
// Exit codes: 0 success, 1 validation failure, 2 I/O or parse error,
// 3 internal error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "eva/dot.hpp"
#include "eva/error.hpp"
#include "eva/executor.hpp"
#include "eva/generator.hpp"
#include "eva/params.hpp"
#include "eva/passes.hpp"
#include "eva/serialization.hpp"
#include "eva/validator.hpp"

namespace {

using nlohmann::ordered_json;

struct Common {
  std::string input;
  std::string format = "text";
  int sf = 60;
};

bool json_lines(const Common& c) { return c.format == "json-lines"; }

int default_sf() {
  if (const char* env = std::getenv("EVA_SF")) {
    try {
      return std::stoi(env);
    } catch (const std::exception&) {
      throw eva::ParseError(std::string("EVA_SF is not an integer: ") + env);
    }
  }
  return 60;
}

std::map<eva::NodeId, double> parse_output_scales(const std::vector<std::string>& items) {
  std::map<eva::NodeId, double> out;
  for (const std::string& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw eva::ParseError("--so expects <id>=<log2 scale>, got " + item);
    try {
      out[std::stoull(item.substr(0, eq))] = std::stod(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw eva::ParseError("--so expects <id>=<log2 scale>, got " + item);
    }
  }
  return out;
}

bool has_compiler_ops(const eva::Program& p) {
  for (eva::NodeId id : p.instructions()) {
    if (eva::is_compiler_only(p.node(id).op)) return true;
  }
  return false;
}

std::string steps_text(const std::set<std::int64_t>& steps) {
  std::string s = "{";
  bool first = true;
  for (auto k : steps) {
    s += (first ? "" : ", ") + std::to_string(k);
    first = false;
  }
  return s + "}";
}

std::string params_text(const eva::CompilationResult& r) {
  std::string bits = "[";
  for (std::size_t i = 0; i < r.bit_sizes.size(); ++i) {
    bits += (i ? ", " : "") + std::to_string(r.bit_sizes[i]);
  }
  bits += "]";
  return "bits: " + bits + "\nrotations: " + steps_text(r.rotation_steps) +
         "\nr: " + std::to_string(r.r) + " logQ: " + std::to_string(r.log_q) + "\n";
}

std::string params_json(const eva::CompilationResult& r) {
  ordered_json j;
  j["kind"] = "params";
  j["bits"] = r.bit_sizes;
  j["rotations"] = r.rotation_steps;
  j["r"] = r.r;
  j["logQ"] = r.log_q;
  j["poly_degree_stub"] = r.poly_degree;
  return j.dump() + "\n";
}

void print_params(const Common& c, const eva::CompilationResult& r) {
  std::cout << (json_lines(c) ? params_json(r) : params_text(r));
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw eva::ParseError("cannot write " + path);
}

int cmd_compile(const Common& c, const std::string& output, const std::vector<std::string>& so,
                std::optional<double> sw, const std::string& pipeline) {
  const eva::Program p = eva::load_program_file(c.input);
  eva::CompileOptions opts;
  opts.sf_bits = c.sf;
  opts.waterline = sw;
  opts.output_scales = parse_output_scales(so);
  if (pipeline == "baseline") {
    opts.rescale = eva::RescaleStrategy::Always;
    opts.modswitch = eva::ModSwitchStrategy::Align;
  } else if (pipeline == "lazy") {
    opts.modswitch = eva::ModSwitchStrategy::Lazy;
  }
  const eva::CompilationResult r = eva::compile(p, opts);
  eva::save_program_file(r.program, output);
  write_file(output + ".params", params_text(r) + "poly_degree_stub: " +
                                     std::to_string(r.poly_degree) + "\n");
  print_params(c, r);
  return 0;
}

int cmd_validate(const Common& c) {
  const eva::Program p = eva::load_program_file(c.input);
  const auto violations = eva::validate(p, c.sf);
  for (const auto& v : violations) {
    std::cout << (json_lines(c) ? eva::render_json(v) : eva::render(v)) << "\n";
  }
  if (json_lines(c)) {
    ordered_json j;
    j["kind"] = "summary";
    j["violations"] = violations.size();
    std::cout << j.dump() << "\n";
  } else if (violations.empty()) {
    std::cout << "valid\n";
  }
  return violations.empty() ? 0 : 1;
}

int cmd_run(const Common& c, const std::string& inputs_path, std::size_t threads, bool quantize,
            const std::string& trace_path, bool no_reuse) {
  const eva::Program p = eva::load_program_file(c.input);
  if (has_compiler_ops(p)) {
    const auto violations = eva::validate(p, c.sf);
    if (!violations.empty()) throw eva::ValidationError(violations);
  }
  const eva::InputMap inputs = eva::parse_inputs(eva::read_text_file(inputs_path));
  eva::ExecOptions opts;
  opts.threads = threads;
  opts.quantize = quantize;
  opts.reuse = !no_reuse;
  opts.trace = !trace_path.empty();
  const eva::RunReport r = eva::execute(p, inputs, opts);
  for (std::size_t i = 0; i < r.outputs.size(); ++i) {
    const eva::NodeId id = p.outputs()[i].node;
    if (json_lines(c)) {
      ordered_json j;
      j["kind"] = "output";
      j["node"] = id;
      j["scale"] = r.output_scales[i];
      j["values"] = r.outputs[i];
      std::cout << j.dump() << "\n";
    } else {
      std::cout << id << ": " << eva::format_values(r.outputs[i])
                << " scale=" << eva::format_double(r.output_scales[i]) << "\n";
    }
  }
  if (json_lines(c)) {
    ordered_json j;
    j["kind"] = "run";
    j["nodes_executed"] = r.nodes_executed;
    j["peak_buffers"] = r.peak_buffers;
    j["wall_ms"] = r.wall_ms;
    std::cout << j.dump() << "\n";
  }
  if (opts.trace) write_file(trace_path, eva::trace_csv(r));
  return 0;
}

int cmd_params(const Common& c, const std::vector<std::string>& so) {
  eva::Program p = eva::load_program_file(c.input);
  eva::CompilationResult r;
  if (has_compiler_ops(p)) {
    for (const auto& [node, scale] : parse_output_scales(so)) {
      for (auto& o : p.mutable_outputs()) {
        if (o.node == node) o.scale = scale;
      }
    }
    r = eva::analyze_compiled(std::move(p), c.sf);
  } else {
    eva::CompileOptions opts;
    opts.sf_bits = c.sf;
    opts.output_scales = parse_output_scales(so);
    r = eva::compile(p, opts);
  }
  print_params(c, r);
  return 0;
}

int cmd_keys(const Common& c) {
  const eva::Program p = eva::load_program_file(c.input);
  const auto steps = eva::select_rotation_steps(p);
  if (json_lines(c)) {
    ordered_json j;
    j["kind"] = "rotations";
    j["steps"] = steps;
    std::cout << j.dump() << "\n";
  } else {
    std::cout << "rotations: " << steps_text(steps) << "\n";
  }
  return 0;
}

int cmd_dot(const Common& c, const std::string& output) {
  const std::string dot = eva::to_dot(eva::load_program_file(c.input));
  if (output.empty()) {
    std::cout << dot;
  } else {
    write_file(output, dot);
  }
  return 0;
}

int cmd_gen(std::uint64_t seed, std::size_t insts, std::uint64_t vec_size, const std::string& output) {
  eva::RandomProgramOptions opts;
  opts.instructions = insts;
  opts.vec_size = vec_size;
  const std::string text = eva::save_program(eva::random_program(seed, opts));
  if (output.empty()) {
    std::cout << text;
  } else {
    write_file(output, text);
  }
  return 0;
}

void report(const Common& c, const char* kind, const std::string& what) {
  if (json_lines(c)) {
    ordered_json j;
    j["kind"] = "error";
    j["class"] = kind;
    j["message"] = what;
    std::cout << j.dump() << "\n";
  }
  std::cerr << "evac: " << what << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EVA compiler toolchain"};
  app.require_subcommand(1);
  Common c;
  try {
    c.sf = default_sf();
  } catch (const eva::Error& e) {
    std::cerr << "evac: " << e.what() << "\n";
    return 2;
  }

  auto common = [&](CLI::App* sub, bool needs_input = true) {
    auto* opt = sub->add_option("-i,--input", c.input, "Program file");
    if (needs_input) opt->required();
    sub->add_option("--sf", c.sf, "log2 of the maximum rescale divisor (default 60 or $EVA_SF)");
    sub->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"text", "json-lines"}));
  };

  std::string output;
  std::vector<std::string> so;
  std::optional<double> sw;
  std::string pipeline = "waterline";
  auto* compile = app.add_subcommand("compile", "Compile an input program");
  common(compile);
  compile->add_option("-o,--output", output, "Compiled program file")->required();
  compile->add_option("--so", so, "Desired output scale, <id>=<log2>");
  compile->add_option("--sw", sw, "Waterline (log2); default is the largest root scale");
  compile->add_option("--pipeline", pipeline, "waterline, lazy or baseline")
      ->check(CLI::IsMember({"waterline", "lazy", "baseline"}));

  auto* validate = app.add_subcommand("validate", "Check constraints 1-4");
  common(validate);

  std::string inputs_path;
  std::size_t threads = 1;
  bool quantize = false;
  bool no_reuse = false;
  std::string trace_path;
  auto* run = app.add_subcommand("run", "Execute under the reference scheme");
  common(run);
  run->add_option("--inputs", inputs_path, "Inputs file")->required();
  run->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  run->add_flag("--quantize", quantize, "Snap values to their fixed-point grid");
  run->add_option("--trace", trace_path, "Write a CSV execution trace");
  run->add_flag("--no-reuse", no_reuse, "Disable buffer reuse");

  auto* params = app.add_subcommand("params", "Print encryption parameter bit sizes");
  common(params);
  params->add_option("--so", so, "Desired output scale, <id>=<log2>");

  auto* keys = app.add_subcommand("keys", "Print rotation key steps");
  common(keys);

  auto* dot = app.add_subcommand("export-dot", "Write a Graphviz description");
  common(dot);
  dot->add_option("-o,--output", output, "Output file (default stdout)");

  std::uint64_t seed = 0;
  std::size_t insts = 8;
  std::uint64_t vec_size = 16;
  auto* gen = app.add_subcommand("gen", "Generate a random input program");
  gen->add_option("--seed", seed, "Random seed");
  gen->add_option("--insts", insts, "Number of instructions");
  gen->add_option("--vec-size", vec_size, "Vector size");
  gen->add_option("-o,--output", output, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*compile) return cmd_compile(c, output, so, sw, pipeline);
    if (*validate) return cmd_validate(c);
    if (*run) return cmd_run(c, inputs_path, threads, quantize, trace_path, no_reuse);
    if (*params) return cmd_params(c, so);
    if (*keys) return cmd_keys(c);
    if (*dot) return cmd_dot(c, output);
    if (*gen) return cmd_gen(seed, insts, vec_size, output);
  } catch (const eva::ValidationError& e) {
    for (const auto& v : e.violations()) {
      std::cout << (json_lines(c) ? eva::render_json(v) : eva::render(v)) << "\n";
    }
    report(c, "validation", e.what());
    return 1;
  } catch (const eva::CompileError& e) {
    report(c, "compile", e.what());
    return 1;
  } catch (const eva::InternalError& e) {
    report(c, "internal", e.what());
    return 3;
  } catch (const eva::Error& e) {
    report(c, "input", e.what());
    return 2;
  } catch (const std::exception& e) {
    report(c, "internal", e.what());
    return 3;
  }
  return 3;
}
