#pragma once

#include <stdexcept>
#include <string>

namespace relukit {

// Input or layer dimensions do not line up.
struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A documented precondition of a constructor or functional is violated.
struct PreconditionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Malformed serialized network. `location` is a byte offset or a JSON pointer.
struct ParseError : std::runtime_error {
  ParseError(const std::string& what, std::string where)
      : std::runtime_error(what + " at " + where), location(std::move(where)) {}
  std::string location;
};

// Strict deserialization found a network outside the bounded-parameter class.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Requested construction is not available for these parameters.
struct UnsupportedError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

}  // namespace relukit
