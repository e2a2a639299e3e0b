#pragma once

// Chat-completion client: provider profiles, request construction, and
// retries with capped exponential backoff and full jitter.

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "eot/prompting.hpp"

namespace eot {

struct RetryPolicy {
  int max_attempts = 5;
  std::chrono::milliseconds base_delay{1000};
  double factor = 2.0;
  std::chrono::milliseconds max_delay{60000};

  /// Upper end of the jitter window before retry number `retry` (1-based):
  /// min(max_delay, base_delay * factor^(retry - 1)).
  std::chrono::milliseconds ceiling(int retry) const noexcept;
};

/// Sampling parameters a provider may accept, in request-body order.
inline constexpr std::array<std::string_view, 5> kSamplingParams{
    "temperature", "top_p", "top_k", "max_tokens", "n"};

struct ProviderProfile {
  std::string name;
  std::string base_url;      // e.g. https://api.example.com/v1
  std::string model_id;
  std::string auth_env_var;  // empty: send no Authorization header
  std::set<std::string, std::less<>> supported_params{"temperature", "top_p", "max_tokens"};
  int max_concurrency = 1;
  std::chrono::milliseconds timeout{60000};
  RetryPolicy retry;

  /// Throws Error(kInvalidArgument).
  void validate() const;
};

/// Profile files use the key/value format, one `[name]` section per
/// provider:
///
///   [gpt-4o]
///   base_url = https://api.openai.com/v1
///   model_id = gpt-4o
///   auth_env_var = OPENAI_API_KEY
///   supported_params = temperature, top_p, max_tokens, n
///   max_concurrency = 4
///   timeout_seconds = 60
///   max_attempts = 5
///   backoff_base_ms = 1000
///   backoff_factor = 2
///   backoff_cap_ms = 60000
///
/// A file without sections holds one profile and must set `name`.
std::vector<ProviderProfile> parse_profiles(std::string_view text, std::string_view source = "<profiles>");
std::vector<ProviderProfile> load_profiles(const std::filesystem::path& path);
/// `name` may be empty when the file holds exactly one profile.
ProviderProfile select_profile(std::span<const ProviderProfile> profiles, std::string_view name);
std::string format_profile(const ProviderProfile& profile);

// ---------------------------------------------------------------------------
// Transport.

struct HttpRequest {
  std::string url;
  std::vector<std::pair<std::string, std::string>> headers;
  std::string body;
  std::chrono::milliseconds timeout{60000};
};

enum class TransportStatus : std::uint8_t { kOk, kTimeout, kConnectionError };

struct HttpResponse {
  TransportStatus transport = TransportStatus::kOk;
  int status = 0;
  std::string body;
  std::optional<std::chrono::seconds> retry_after;
  std::string error;  // transport error description
};

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse post(const HttpRequest& request) = 0;
};

/// Blocking transport over cpp-httplib; safe to share across threads.
std::shared_ptr<HttpTransport> make_http_transport();

// ---------------------------------------------------------------------------
// Completion.

struct RequestBody {
  std::string json;
  std::vector<std::string> dropped_params;
};

/// `{"model", "messages", <sampling params in supported_params>}`.
RequestBody build_request_body(const ProviderProfile& profile,
                               std::span<const ChatMessage> messages,
                               const InferenceConfig& config);

/// Text of `choices[0].message.content`; throws Error(kProviderError).
std::string parse_completion_text(std::string_view body);

struct CompletionContext {
  std::shared_ptr<HttpTransport> transport;  // null: make_http_transport()
  std::function<void(std::chrono::milliseconds)> sleep;  // null: sleep_for
  std::function<std::optional<std::string>(const std::string&)> getenv;  // null: std::getenv
  std::function<void(std::string_view)> log;  // null: std::clog
  std::uint64_t jitter_seed = 0;              // 0: nondeterministic
};

struct CompletionResult {
  std::string text;
  int attempts = 0;
  std::chrono::milliseconds latency{0};
};

/// Throws Error(kAuthMissing) when the profile's variable is unset or empty.
std::optional<std::string> require_auth_token(const ProviderProfile& profile,
                                              const CompletionContext& context);

/// One logical completion. Timeouts, connection failures, 408, 429 and 5xx
/// are retried up to profile.retry.max_attempts. Exhaustion raises
/// RateLimited (429), Timeout, or ProviderError; other statuses raise
/// ProviderError immediately. Errors carry the attempt count.
CompletionResult complete(const ProviderProfile& profile, std::span<const ChatMessage> messages,
                          const InferenceConfig& config, const CompletionContext& context = {});

}  // namespace eot
