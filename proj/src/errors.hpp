#pragma once

#include <stdexcept>
#include <string>

namespace nowcast {

// Bad or inconsistent input data / configuration. Maps to exit code 2.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure (divergent state, non-finite density). Maps to exit code 4.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace nowcast
