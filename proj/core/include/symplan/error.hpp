#pragma once

#include <stdexcept>
#include <string>

namespace symplan {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// PDDL / serialization errors carry a source position when known.
struct ParseError : Error {
  ParseError(const std::string& msg, int line, int col)
      : Error(msg + " (line " + std::to_string(line) + ", col " + std::to_string(col) + ")"),
        line(line), col(col) {}
  explicit ParseError(const std::string& msg) : Error(msg), line(-1), col(-1) {}
  int line;
  int col;
};

struct CapExceededError : Error {
  using Error::Error;
};

struct PositionOverflowError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

}  // namespace symplan
