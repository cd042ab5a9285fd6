#pragma once

#include <stdexcept>
#include <string>

namespace pointfuse {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File and format errors.
struct MalformedFileError final : Error { using Error::Error; };
struct NonFiniteDataError final : Error { using Error::Error; };
struct IoError final : Error { using Error::Error; };
struct DanglingTrackError final : Error { using Error::Error; };
struct OutOfBoundsPixelError final : Error { using Error::Error; };
struct DimensionMismatchError final : Error { using Error::Error; };
struct MaskDimensionMismatchError final : Error { using Error::Error; };

// Geometry and estimation errors.
struct NonFiniteInputError final : Error { using Error::Error; };
struct DegenerateConfigurationError final : Error { using Error::Error; };
struct TooFewCorrespondencesError final : Error { using Error::Error; };
struct AllSamplesDegenerateError final : Error { using Error::Error; };
struct InvariantViolationError final : Error { using Error::Error; };

// Scene and pipeline errors.
struct EmptySceneError final : Error { using Error::Error; };
struct EmptyInputError final : Error { using Error::Error; };
struct ViewMismatchError final : Error { using Error::Error; };
struct CountMismatchError final : Error { using Error::Error; };
struct IndexMismatchError final : Error { using Error::Error; };
struct ProviderFailureError final : Error { using Error::Error; };
struct InvalidSpecError final : Error { using Error::Error; };

}  // namespace pointfuse
