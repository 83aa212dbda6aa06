#pragma once

#include <stdexcept>
#include <string>

namespace eul2d {

// Solver breakdown: non-convergence, non-finite state, step-size violation.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CflError : public NumericalError {
 public:
  CflError(double cfl, double limit, double required_dt)
      : NumericalError("CFL number " + std::to_string(cfl) + " exceeds " + std::to_string(limit) +
                       "; reduce dt to at most " + std::to_string(required_dt)),
        cfl_(cfl),
        required_dt_(required_dt) {}

  double cfl() const { return cfl_; }
  double required_dt() const { return required_dt_; }

 private:
  double cfl_;
  double required_dt_;
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line = 0, int column = 0)
      : std::runtime_error(line > 0 ? std::to_string(line) + ":" + std::to_string(column) + ": " + what : what),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace eul2d
