#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace eot {

enum class ErrorCode {
  kInvalidArgument,
  kUnknownEmotion,
  kInvalidSpan,
  kInvalidOutput,
  kMalformedRecord,
  kIo,
  kEmptyCorpus,
  kSampleTooLarge,
  kInsufficientReviews,
  kMismatchedReviewIds,
  kWrongAnnotatorCount,
  kDegenerateDistribution,
  kNoStructuredBlock,
  kAuthMissing,
  kRateLimited,
  kProviderError,
  kTimeout,
  kMissingGold,
  kUnknownRun,
  kRunExists,
};

/// Coarse grouping used for process exit codes.
enum class ErrorClass { kUsage, kData, kProvider };

std::string_view to_string(ErrorCode code) noexcept;
ErrorClass classify(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

  // Provider failures carry the last HTTP status (0 when the transport
  // failed before a response) and how many attempts were made.
  int http_status() const noexcept { return http_status_; }
  int attempts() const noexcept { return attempts_; }

  Error& with_http_status(int status) noexcept {
    http_status_ = status;
    return *this;
  }
  Error& with_attempts(int attempts) noexcept {
    attempts_ = attempts;
    return *this;
  }

 private:
  ErrorCode code_;
  int http_status_ = 0;
  int attempts_ = 0;
};

}  // namespace eot
