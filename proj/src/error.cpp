#include "mclt/error.hpp"

namespace mclt {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::NegativeEntry: return "NegativeEntry";
    case Errc::RowSumOutOfTolerance: return "RowSumOutOfTolerance";
    case Errc::NotSquare: return "NotSquare";
    case Errc::DuplicateLabel: return "DuplicateLabel";
    case Errc::NonFiniteValue: return "NonFiniteValue";
    case Errc::NotIrreducible: return "NotIrreducible";
    case Errc::SingularSystem: return "SingularSystem";
    case Errc::NotCentered: return "NotCentered";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::InvalidState: return "InvalidState";
    case Errc::NotReversible: return "NotReversible";
    case Errc::EigenFailure: return "EigenFailure";
    case Errc::WrongDimension: return "WrongDimension";
    case Errc::NegativeVariance: return "NegativeVariance";
    case Errc::InvalidParams: return "InvalidParams";
    case Errc::StateSpaceTooLarge: return "StateSpaceTooLarge";
    case Errc::InvalidStart: return "InvalidStart";
    case Errc::InsufficientVisits: return "InsufficientVisits";
    case Errc::FileNotFound: return "FileNotFound";
    case Errc::ParseError: return "ParseError";
  }
  return "Unknown";
}

}  // namespace mclt
