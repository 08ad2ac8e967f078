#include "eva/error.hpp"

namespace eva {

namespace {

template <class T>
[[noreturn]] void again(const T& e, std::uint64_t node) {
  T copy("node " + std::to_string(node) + ": " + e.what());
  copy.set_node(node);
  throw copy;
}

}  // namespace

void rethrow_at_node(std::uint64_t node) {
  try {
    throw;
  } catch (const Error& e) {
    if (e.node()) throw;
  }
  try {
    throw;
  } catch (const UnsupportedOpcode& e) {
    again(e, node);
  } catch (const ProgramError& e) {
    again(e, node);
  } catch (const ParseError& e) {
    again(e, node);
  } catch (const CompileError& e) {
    again(e, node);
  } catch (const ExecutionError& e) {
    again(e, node);
  } catch (const InternalError& e) {
    again(e, node);
  } catch (const Error& e) {
    throw NodeError(node, e.what());
  }
}

}  // namespace eva
