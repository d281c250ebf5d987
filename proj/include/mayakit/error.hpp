#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mayakit {

inline constexpr std::string_view version = "0.1.0";

enum class ErrorCode {
  unsupported_feature,
  malformed,
  shape_mismatch,
  duplicate_modality,
  empty_series,
  missing_group,
  no_channels,
  invalid_mask_value,
  empty_mask,
  patch_too_large,
  no_donors,
  no_backgrounds,
  unsatisfiable_weight,
  too_few_tiles,
  no_valid_position,
  missing_prob_map,
  empty_ensemble,
  crop_too_large,
  missing_class,
  config_invalid,
  input_missing,
  stage_failure,
  invalid_argument,
};

inline constexpr const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::unsupported_feature: return "UnsupportedFeature";
    case ErrorCode::malformed: return "Malformed";
    case ErrorCode::shape_mismatch: return "ShapeMismatch";
    case ErrorCode::duplicate_modality: return "DuplicateModality";
    case ErrorCode::empty_series: return "EmptySeries";
    case ErrorCode::missing_group: return "MissingGroup";
    case ErrorCode::no_channels: return "NoChannels";
    case ErrorCode::invalid_mask_value: return "InvalidMaskValue";
    case ErrorCode::empty_mask: return "EmptyMask";
    case ErrorCode::patch_too_large: return "PatchTooLarge";
    case ErrorCode::no_donors: return "NoDonors";
    case ErrorCode::no_backgrounds: return "NoBackgrounds";
    case ErrorCode::unsatisfiable_weight: return "UnsatisfiableWeight";
    case ErrorCode::too_few_tiles: return "TooFewTiles";
    case ErrorCode::no_valid_position: return "NoValidPosition";
    case ErrorCode::missing_prob_map: return "MissingProbMap";
    case ErrorCode::empty_ensemble: return "EmptyEnsemble";
    case ErrorCode::crop_too_large: return "CropTooLarge";
    case ErrorCode::missing_class: return "MissingClass";
    case ErrorCode::config_invalid: return "ConfigInvalid";
    case ErrorCode::input_missing: return "InputMissing";
    case ErrorCode::stage_failure: return "StageFailure";
    case ErrorCode::invalid_argument: return "InvalidArgument";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

  ErrorCode code() const { return code_; }
  const char* code_name() const { return error_code_name(code_); }

 private:
  ErrorCode code_;
};

}  // namespace mayakit
