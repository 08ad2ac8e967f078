#pragma once

#include <string>

#include "eva/program.hpp"

namespace eva {

/// Graphviz description of the program: one box per node labelled with its
/// id, opcode or kind, and type; edges labelled with the argument position.
std::string to_dot(const Program& p);

}  // namespace eva
