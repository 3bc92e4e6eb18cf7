#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mclt {

enum class Errc {
  NegativeEntry = 1,
  RowSumOutOfTolerance,
  NotSquare,
  DuplicateLabel,
  NonFiniteValue,
  NotIrreducible,
  SingularSystem,
  NotCentered,
  LengthMismatch,
  InvalidState,
  NotReversible,
  EigenFailure,
  WrongDimension,
  NegativeVariance,
  InvalidParams,
  StateSpaceTooLarge,
  InvalidStart,
  InsufficientVisits,
  FileNotFound,
  ParseError,
};

std::string_view to_string(Errc code) noexcept;

/// Exception carrying a machine-readable error kind. The CLI maps `code()` to
/// its exit status.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace mclt
