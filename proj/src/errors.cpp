#include "crr/errors.hpp"

namespace crr {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidModel: return "InvalidModel";
    case ErrorKind::ZeroMass: return "ZeroMass";
    case ErrorKind::ZeroDenominator: return "ZeroDenominator";
    case ErrorKind::MissingGroup: return "MissingGroup";
    case ErrorKind::DegenerateOdds: return "DegenerateOdds";
    case ErrorKind::TooManyUndefined: return "TooManyUndefined";
    case ErrorKind::UnknownStratum: return "UnknownStratum";
    case ErrorKind::MissingColumn: return "MissingColumn";
    case ErrorKind::UnparseableRow: return "UnparseableRow";
    case ErrorKind::NegativeCount: return "NegativeCount";
    case ErrorKind::EmptySubset: return "EmptySubset";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::IOFailure: return "IOFailure";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

}  // namespace crr
