#pragma once

#include <stdexcept>
#include <string>

namespace vapors {

// Precondition violated by a caller-supplied value.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed or inconsistent input data (files, sample sets, configs).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A computation could not produce a finite result.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace vapors
