#pragma once

#include <stdexcept>
#include <string>

namespace aec {

// Invalid sizes, partition counts, rates or other setup parameters.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller passed arguments outside an operation's domain.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numeric precondition on the data (not the shape) was violated.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class AudioFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace aec
