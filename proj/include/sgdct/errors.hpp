#pragma once

#include <stdexcept>
#include <string>

namespace sgdct {

// Invalid configuration, detected before any compute starts.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure during or after compute: non-finite values, divergent
// integrals, unusable statistics.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace sgdct
