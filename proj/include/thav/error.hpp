#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace thav {

enum class ErrorKind {
  InvalidArgument,
  NonFinite,
  NotPositiveDefinite,
  DimensionMismatch,
  DegenerateColumn,
  GridDegenerate,
  PathFailure,
  NonPositiveDiagonal,
  LambdaOutOfRange,
  GenerationFailure,
  DimensionCapExceeded,
  SingularGammaSS,
  Parse,
  Io,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::DegenerateColumn: return "DegenerateColumn";
    case ErrorKind::GridDegenerate: return "GridDegenerate";
    case ErrorKind::PathFailure: return "PathFailure";
    case ErrorKind::NonPositiveDiagonal: return "NonPositiveDiagonal";
    case ErrorKind::LambdaOutOfRange: return "LambdaOutOfRange";
    case ErrorKind::GenerationFailure: return "GenerationFailure";
    case ErrorKind::DimensionCapExceeded: return "DimensionCapExceeded";
    case ErrorKind::SingularGammaSS: return "SingularGammaSS";
    case ErrorKind::Parse: return "Parse";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

/// Base exception for everything thrown by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised by the factorization; carries the row at which the pivot failed.
class NotPositiveDefiniteError : public Error {
 public:
  NotPositiveDefiniteError(std::size_t index, double pivot)
      : Error(ErrorKind::NotPositiveDefinite,
              "pivot " + std::to_string(pivot) + " at index " + std::to_string(index)),
        index_(index) {}

  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// Raised when a path fit fails to converge even after a cold restart.
class PathFailureError : public Error {
 public:
  explicit PathFailureError(double r, const std::string& detail = {})
      : Error(ErrorKind::PathFailure,
              "fit did not converge at r = " + std::to_string(r) +
                  (detail.empty() ? std::string() : " (" + detail + ")")),
        r_(r) {}

  double r() const noexcept { return r_; }

 private:
  double r_;
};

}  // namespace thav
