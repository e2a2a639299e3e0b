#include "eot/error.hpp"

namespace eot {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kUnknownEmotion: return "UnknownEmotion";
    case ErrorCode::kInvalidSpan: return "InvalidSpan";
    case ErrorCode::kInvalidOutput: return "InvalidOutput";
    case ErrorCode::kMalformedRecord: return "MalformedRecord";
    case ErrorCode::kIo: return "Io";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kSampleTooLarge: return "SampleTooLarge";
    case ErrorCode::kInsufficientReviews: return "InsufficientReviews";
    case ErrorCode::kMismatchedReviewIds: return "MismatchedReviewIds";
    case ErrorCode::kWrongAnnotatorCount: return "WrongAnnotatorCount";
    case ErrorCode::kDegenerateDistribution: return "DegenerateDistribution";
    case ErrorCode::kNoStructuredBlock: return "NoStructuredBlock";
    case ErrorCode::kAuthMissing: return "AuthMissing";
    case ErrorCode::kRateLimited: return "RateLimited";
    case ErrorCode::kProviderError: return "ProviderError";
    case ErrorCode::kTimeout: return "Timeout";
    case ErrorCode::kMissingGold: return "MissingGold";
    case ErrorCode::kUnknownRun: return "UnknownRun";
    case ErrorCode::kRunExists: return "RunExists";
  }
  return "Unknown";
}

ErrorClass classify(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return ErrorClass::kUsage;
    case ErrorCode::kAuthMissing:
    case ErrorCode::kRateLimited:
    case ErrorCode::kProviderError:
    case ErrorCode::kTimeout:
      return ErrorClass::kProvider;
    default:
      return ErrorClass::kData;
  }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code) {}

}  // namespace eot
