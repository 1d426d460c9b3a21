#pragma once

#include <stdexcept>
#include <string>

namespace d2dcache {

/// Raised when a quadrature, root search or bracketing step cannot reach its
/// tolerance. The message carries the inputs needed to reproduce the failure.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by the configuration loader. `line()` is 1-based, or 0 when the
/// problem is not tied to a particular line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
        line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// Raised when results cannot be written; the message names the path.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace d2dcache
