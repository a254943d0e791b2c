#pragma once

#include <stdexcept>
#include <string>

namespace lobliq {

// Invalid model, market or discretization parameters. Maps to CLI exit code 2.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A solver could not produce a trustworthy answer (bracket failure,
// non-finite state, overflow guard). Maps to CLI exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lobliq
