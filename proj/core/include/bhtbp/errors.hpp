#pragma once

#include <stdexcept>
#include <string>

namespace bhtbp {

/// A configuration or problem spec violates its documented invariants.
class InvalidSpec : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Operands disagree in size (matrix vs. signal, grid vs. grid, ...).
class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A density lost all of its mass (total below the normalization floor).
class DegenerateMessage : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed instance, config or CSV text.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bhtbp
