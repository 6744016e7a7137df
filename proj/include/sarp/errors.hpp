#pragma once

#include <stdexcept>
#include <string>

namespace sarp {

// Bad user input: pulse/grid preconditions, malformed configs.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure: integrator non-convergence, failed fits, failed scans.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace sarp
