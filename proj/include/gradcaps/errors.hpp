#pragma once

#include <stdexcept>
#include <string>

namespace gradcaps {

// Rejected before any training starts; maps to CLI exit code 1.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Mid-run failure (non-finite loss, broken output dir); maps to exit code 2.
class RuntimeAbort : public std::runtime_error {
 public:
  explicit RuntimeAbort(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gradcaps
