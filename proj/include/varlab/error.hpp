#pragma once

#include <stdexcept>
#include <string>

namespace varlab {

/// Thrown when an operation is called outside of its domain (bad level,
/// exponent, radius, malformed input).
class precondition_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a computed object violates one of its documented invariants.
class invariant_error : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw precondition_error(message);
}

inline void ensure(bool condition, const std::string& message) {
  if (!condition) throw invariant_error(message);
}

}  // namespace varlab
