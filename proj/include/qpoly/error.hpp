#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace qpoly {

enum class ErrorKind {
  InvalidDimension,
  DimensionMismatch,
  InvalidPovm,
  InvalidState,
  DomainError,
  InvalidSplit,
  InvalidGroup,
  BasisMismatch,
  EmptyRegion,
  UnboundedAxis,
  ChainStall,
  DegenerateWeights,
  NumericalFailure,
  SchemaError,
  NonQubit,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidDimension: return "InvalidDimension";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::InvalidPovm: return "InvalidPovm";
    case ErrorKind::InvalidState: return "InvalidState";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::InvalidSplit: return "InvalidSplit";
    case ErrorKind::InvalidGroup: return "InvalidGroup";
    case ErrorKind::BasisMismatch: return "BasisMismatch";
    case ErrorKind::EmptyRegion: return "EmptyRegion";
    case ErrorKind::UnboundedAxis: return "UnboundedAxis";
    case ErrorKind::ChainStall: return "ChainStall";
    case ErrorKind::DegenerateWeights: return "DegenerateWeights";
    case ErrorKind::NumericalFailure: return "NumericalFailure";
    case ErrorKind::SchemaError: return "SchemaError";
    case ErrorKind::NonQubit: return "NonQubit";
  }
  return "Unknown";
}

/// Library-wide exception. `index` carries the offending POVM element or axis
/// where one exists; `pointer` carries a JSON pointer for schema errors.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what,
        std::optional<std::size_t> index = std::nullopt,
        std::string pointer = {})
      : std::runtime_error(what), kind_(kind), index_(index), pointer_(std::move(pointer)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::optional<std::size_t>& index() const noexcept { return index_; }
  const std::string& pointer() const noexcept { return pointer_; }

 private:
  ErrorKind kind_;
  std::optional<std::size_t> index_;
  std::string pointer_;
};

}  // namespace qpoly
