#pragma once

#include <stdexcept>
#include <string>

namespace msgn {

// Error raised while parsing a network description or a config file.
// line/col are 1-based; col == 0 means "whole line".
class parse_error : public std::runtime_error {
 public:
  parse_error(std::string msg, int line = 0, int col = 0)
      : std::runtime_error(format(msg, line, col)), line_(line), col_(col) {}
  int line() const { return line_; }
  int col() const { return col_; }

 private:
  static std::string format(const std::string& msg, int line, int col) {
    if (line <= 0) return msg;
    std::string s = "line " + std::to_string(line);
    if (col > 0) s += ", col " + std::to_string(col);
    return s + ": " + msg;
  }
  int line_;
  int col_;
};

// A structural or sampled-domain violation in a reaction network.
class validation_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Simulation aborted: accepted-event or candidate-point safety cap
// exceeded. Reported as a distinct outcome, not a crash.
class cap_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Adaptive ODE step-size underflow or non-finite state.
class integrator_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace msgn
