#pragma once

#include <stdexcept>
#include <string>

namespace sgld {

// Caller violated a precondition (bad dimension, empty sample, unsupported mode).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical procedure failed: non-finite state, quadrature or root-finding
// that did not reach its tolerance, degenerate constants.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sgld
