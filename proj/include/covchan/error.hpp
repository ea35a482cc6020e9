#pragma once

#include <stdexcept>
#include <string>

namespace covchan {

// Raised for any parameter or scenario that violates a model invariant.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// Raised when a received bit stream cannot be split into code words.
class FramingError : public std::runtime_error {
 public:
  explicit FramingError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace covchan
