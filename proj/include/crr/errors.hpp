#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace crr {

enum class ErrorKind {
  InvalidModel,
  ZeroMass,
  ZeroDenominator,
  MissingGroup,
  DegenerateOdds,
  TooManyUndefined,
  UnknownStratum,
  MissingColumn,
  UnparseableRow,
  NegativeCount,
  EmptySubset,
  InvalidArgument,
  IOFailure,
};

std::string_view to_string(ErrorKind kind);

// Every recoverable failure in the library is reported through this type.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace crr
