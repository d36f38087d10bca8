#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nada {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or truncated binary container.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A domain invariant does not hold (bad span, degenerate box, unknown label).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Text that could not be parsed; `offset` is the byte position of the fault.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " (at offset " + std::to_string(offset) + ")"), offset_(offset) {}

  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace nada
