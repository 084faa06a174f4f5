#pragma once

#include <stdexcept>
#include <string>

namespace fedstyle {

// Bad dimensions between tensors/vectors that should agree.
struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Caller handed us data that violates a documented precondition.
struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// NaN/Inf showed up where finite values are required.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed text input (CSV, config). Carries a 1-based line number.
struct ParseError : std::runtime_error {
  int line;
  ParseError(const std::string& msg, int line_no)
      : std::runtime_error(msg + " (line " + std::to_string(line_no) + ")"),
        line(line_no) {}
  explicit ParseError(const std::string& msg) : std::runtime_error(msg), line(0) {}
};

// Protocol-level violation of the federation loop (missing update etc).
struct ProtocolError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad experiment configuration, reported before round 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace fedstyle
