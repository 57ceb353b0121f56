#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace mmobs {

enum class ErrorKind {
  SyntaxError,
  UnknownIdentifier,
  DivisionByZero,
  NonFiniteResult,
  DomainError,
  DimensionMismatch,
  NonSquare,
  SingularMatrix,
  NonSymmetric,
  NonFiniteJacobian,
  SignUnstableRow,
  SingularX,
  SignAssertionFailed,
  InfeasibleAllAlpha,
  SolverFailure,
  IllFormedProblem,
  NonFiniteState,
  StepTooLarge,
  OrderingViolation,
  DomainExit,
  ParseError,
  ValidationError,
  IoError,
};

[[nodiscard]] std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Raised by the expression parser. `position` is a 0-based character offset
// into the parsed text.
class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t position, std::string expected, const std::string& detail)
      : Error(ErrorKind::SyntaxError,
              "at position " + std::to_string(position) + ": " + detail + " (expected " + expected + ")"),
        position_(position),
        expected_(std::move(expected)) {}

  [[nodiscard]] std::size_t position() const noexcept { return position_; }
  [[nodiscard]] const std::string& expected() const noexcept { return expected_; }

 private:
  std::size_t position_;
  std::string expected_;
};

// Raised by the system-file loader; line and column are 1-based.
class FileParseError : public Error {
 public:
  FileParseError(std::size_t line, std::size_t column, const std::string& detail)
      : Error(ErrorKind::ParseError,
              "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + detail),
        line_(line),
        column_(column) {}

  [[nodiscard]] std::size_t line() const noexcept { return line_; }
  [[nodiscard]] std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace mmobs
