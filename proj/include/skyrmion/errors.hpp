#pragma once

#include <stdexcept>
#include <string>

namespace skyrmion {

// Bad input: parameters out of range, mismatched grids, malformed lists.
class ValidationError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// A well-posed computation that did not produce a usable answer.
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace skyrmion
