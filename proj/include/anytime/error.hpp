#pragma once

#include <stdexcept>
#include <string>

namespace anytime {

/// Invalid construction parameters (alpha outside (0,1), lambda outside its domain, ...).
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// Invalid argument to a pure function.
class ArgumentError : public std::invalid_argument {
 public:
  explicit ArgumentError(const std::string& what) : std::invalid_argument(what) {}
};

/// Operation not permitted in the object's current lifecycle state.
class StateError : public std::logic_error {
 public:
  explicit StateError(const std::string& what) : std::logic_error(what) {}
};

/// Malformed external input (CSV batch, session file, request body).
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace anytime
