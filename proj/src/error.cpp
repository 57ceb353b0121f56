#include "mmobs/error.hpp"

namespace mmobs {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::SyntaxError: return "SyntaxError";
    case ErrorKind::UnknownIdentifier: return "UnknownIdentifier";
    case ErrorKind::DivisionByZero: return "DivisionByZero";
    case ErrorKind::NonFiniteResult: return "NonFiniteResult";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NonSquare: return "NonSquare";
    case ErrorKind::SingularMatrix: return "SingularMatrix";
    case ErrorKind::NonSymmetric: return "NonSymmetric";
    case ErrorKind::NonFiniteJacobian: return "NonFiniteJacobian";
    case ErrorKind::SignUnstableRow: return "SignUnstableRow";
    case ErrorKind::SingularX: return "SingularX";
    case ErrorKind::SignAssertionFailed: return "SignAssertionFailed";
    case ErrorKind::InfeasibleAllAlpha: return "InfeasibleAllAlpha";
    case ErrorKind::SolverFailure: return "SolverFailure";
    case ErrorKind::IllFormedProblem: return "IllFormedProblem";
    case ErrorKind::NonFiniteState: return "NonFiniteState";
    case ErrorKind::StepTooLarge: return "StepTooLarge";
    case ErrorKind::OrderingViolation: return "OrderingViolation";
    case ErrorKind::DomainExit: return "DomainExit";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ValidationError: return "ValidationError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Error";
}

}  // namespace mmobs
