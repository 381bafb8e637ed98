#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ecolife {

// Negative durations, energies, or other values outside a formula's domain.
class domain_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A function's memory does not fit the device or pool it is attributed to.
class capacity_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A function profile lacks an entry for a hardware generation, or is malformed.
class profile_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input file errors. `line` is 1-based; 0 when the error is not tied to a line.
class parse_error : public std::runtime_error {
 public:
  parse_error(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Oracle-style policies refuse traces beyond their enumeration budget.
class size_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ecolife
