#pragma once

#include <array>
#include <stdexcept>
#include <string>

namespace udot {

enum class ErrorCode {
  InvalidField,
  InvalidPoint,
  InvalidArgument,
  ConvergenceFailure,
  InfeasibleMassBalance,
  Infeasible,
  ExitsDomain,
  ParseError,
  Io,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Raised by iterative solvers that ran out of iterations.
class ConvergenceFailure : public Error {
 public:
  ConvergenceFailure(const std::string& what, double achieved_residual)
      : Error(ErrorCode::ConvergenceFailure, what),
        residual_(achieved_residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class ExitsDomain : public Error {
 public:
  ExitsDomain(const std::string& what, double t, std::array<double, 2> x)
      : Error(ErrorCode::ExitsDomain, what), t_(t), x_(x) {}
  double time() const noexcept { return t_; }
  const std::array<double, 2>& position() const noexcept { return x_; }

 private:
  double t_;
  std::array<double, 2> x_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line)
      : Error(ErrorCode::ParseError,
              line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace udot
