#pragma once

#include <string>
#include <vector>

#include "eva/error.hpp"
#include "eva/program.hpp"

namespace eva {

/// A broken constraint: 1 modulus chains, 2 scales, 3 polynomial count,
/// 4 rescale divisor cap.
struct Violation {
  int constraint = 0;
  NodeId node = 0;
  std::string detail;
  friend bool operator==(const Violation&, const Violation&) = default;
};

/// Cipher-cipher Add/Sub/Multiply whose operands carry unequal rescale chains.
std::vector<Violation> check_chains(const Program& p);

/// Cipher-cipher Add/Sub with unequal operand scales (constraint 2), and
/// Rescale divisors that are not in [2^1, 2^sf_bits] (constraint 4).
std::vector<Violation> check_scales(const Program& p, int sf_bits = 60);

/// Cipher operands with more than two polynomials anywhere except as the
/// operand of a Relinearize, including at outputs.
std::vector<Violation> check_npoly(const Program& p);

/// All of the above, ordered by constraint, then by position in topological order.
std::vector<Violation> validate(const Program& p, int sf_bits = 60);

/// `C<k> node=<id> <detail>`
std::string render(const Violation& v);
/// One JSON object on a single line.
std::string render_json(const Violation& v);

/// Raised by compile() when the transformed program does not validate.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<Violation> violations);
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

}  // namespace eva
