#pragma once

#include <stdexcept>
#include <string>

namespace prefts {

// Invalid configuration: bad shapes, malformed specs, out-of-range parameters.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Variational ascent left the sane region (|mu| > 1e3 * H).
class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(const std::string& what) : std::runtime_error(what) {}
};

// Eluder search caps exceeded.
class TooLargeError : public std::runtime_error {
 public:
  explicit TooLargeError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace prefts
