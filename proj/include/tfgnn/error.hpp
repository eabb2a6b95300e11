#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tfgnn {

// Bad arguments to an operation: out-of-range indices, shape mismatches.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A model or training configuration that cannot be honoured.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A dataset bundle that violates the on-disk contract.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string file, std::size_t line, const std::string& what)
      : std::runtime_error(file + (line ? ":" + std::to_string(line) : std::string()) +
                           ": " + what),
        file_(std::move(file)),
        line_(line) {}

  const std::string& file() const noexcept { return file_; }
  // 1-based; 0 when the problem is not tied to a line.
  std::size_t line() const noexcept { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

// Non-finite loss or similar numerical breakdown.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tfgnn
