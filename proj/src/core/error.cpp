#include "ragmem/error.hpp"

namespace ragmem {

std::string_view code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ZeroVector: return "zero_vector";
    case ErrorCode::NonFinite: return "non_finite";
    case ErrorCode::DimMismatch: return "dim_mismatch";
    case ErrorCode::CountMismatch: return "count_mismatch";
    case ErrorCode::ShapeMismatch: return "shape_mismatch";
    case ErrorCode::UnknownValue: return "unknown_value";
    case ErrorCode::MissingAttribute: return "missing_attribute";
    case ErrorCode::DuplicateId: return "duplicate_id";
    case ErrorCode::NotFound: return "not_found";
    case ErrorCode::EmptyDatabase: return "empty_database";
    case ErrorCode::KTooLarge: return "k_too_large";
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::NumericalFailure: return "numerical_failure";
    case ErrorCode::DegenerateFusion: return "degenerate_fusion";
    case ErrorCode::AllWeightsNonPositive: return "all_weights_non_positive";
    case ErrorCode::EmptyMask: return "empty_mask";
    case ErrorCode::EmptyAfterCuration: return "empty_after_curation";
    case ErrorCode::NonPositiveTau: return "non_positive_tau";
    case ErrorCode::Io: return "io";
    case ErrorCode::CorruptManifest: return "corrupt_manifest";
    case ErrorCode::ChecksumMismatch: return "checksum_mismatch";
    case ErrorCode::ValidationFailed: return "validation_failed";
  }
  return "unknown";
}

}  // namespace ragmem
