#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "eva/program.hpp"
#include "eva/rewrite.hpp"

namespace eva {

/// Chain element recorded for a ModSwitch.
inline constexpr double kModSwitchMark = std::numeric_limits<double>::infinity();

/// Ordered log2 divisors consumed on the way to a node; ModSwitch entries hold
/// kModSwitchMark.
class RescaleChain {
 public:
  RescaleChain() = default;
  explicit RescaleChain(std::vector<double> elements) : elements_(std::move(elements)) {}

  const std::vector<double>& elements() const { return elements_; }
  std::size_t size() const { return elements_.size(); }
  bool empty() const { return elements_.empty(); }
  void push(double log2_divisor) { elements_.push_back(log2_divisor); }

  /// Same length, and at every position the values agree or one is a ModSwitch.
  bool equals(const RescaleChain& other) const;
  /// Elementwise merge of two equal chains, keeping concrete divisors over marks.
  RescaleChain meet(const RescaleChain& other) const;

  /// "{60, M, 60}" with M for a ModSwitch.
  std::string to_string() const;

  friend bool operator==(const RescaleChain&, const RescaleChain&) = default;

 private:
  std::vector<double> elements_;
};

/// log2 of the divisor held by a Rescale node's second operand.
double rescale_divisor(const Program& p, const Node& rescale);

/// Scale of every node (log2). Cipher-cipher Add/Sub with unequal operands
/// take the larger scale; plaintext operands of Add/Sub take the cipher's scale.
NodeState<double> compute_scales(const Program& p);

/// Scale of one instruction given the scales of its operands.
double instruction_scale(const Program& p, const Node& n,
                         const std::function<double(NodeId)>& scale_of);

/// Polynomial count of every Cipher node; 0 for the others.
NodeState<int> compute_npoly(const Program& p);

/// Conforming chain of every Cipher node, or nullopt when the node or one of
/// its ancestors has operands with unequal chains. Non-cipher nodes hold nullopt.
NodeState<std::optional<RescaleChain>> compute_chains(const Program& p);

/// Length of the lazily aligned chain of every Cipher node: the largest level
/// among its cipher operands, plus one for Rescale and ModSwitch. 0 for the others.
NodeState<int> compute_levels(const Program& p);

}  // namespace eva
