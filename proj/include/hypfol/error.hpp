#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hypfol {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression text. `offset()` is the byte offset of the
/// offending token in the input.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Invalid metric or experiment specification (schema, ranges, symmetry).
class SpecError : public Error {
 public:
  using Error::Error;
};

/// Non-finite value produced while evaluating an expression.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Geometric precondition violated: non-positive-definite metric, chart
/// mismatch, r outside the admissible range, singular forms.
class GeometryError : public Error {
 public:
  using Error::Error;
};

}  // namespace hypfol
