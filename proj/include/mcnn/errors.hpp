#pragma once

#include <stdexcept>
#include <string>

namespace mcnn {

/// Dimensions of a vector, matrix or layer chain do not line up.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An argument violates an operation's precondition (empty data, r outside
/// [0,1], illegal board, ...).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A serialized artifact (model, chain, dataset) is malformed.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mcnn
