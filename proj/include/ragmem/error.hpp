#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ragmem {

enum class ErrorCode {
  ZeroVector,
  NonFinite,
  DimMismatch,
  CountMismatch,
  ShapeMismatch,
  UnknownValue,
  MissingAttribute,
  DuplicateId,
  NotFound,
  EmptyDatabase,
  KTooLarge,
  InvalidArgument,
  NumericalFailure,
  DegenerateFusion,
  AllWeightsNonPositive,
  EmptyMask,
  EmptyAfterCuration,
  NonPositiveTau,
  Io,
  CorruptManifest,
  ChecksumMismatch,
  ValidationFailed,
};

/// Stable snake_case name, used in HTTP error bodies and CLI messages.
std::string_view code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ragmem
