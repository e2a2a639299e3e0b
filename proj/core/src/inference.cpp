#include "eot/inference.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <random>
#include <thread>

#include "eot/corpus.hpp"
#include "eot/error.hpp"
#include "json_records.hpp"
#include "kv.hpp"

namespace eot {

using detail::json;
using detail::ojson;

std::chrono::milliseconds RetryPolicy::ceiling(int retry) const noexcept {
  const double scaled = static_cast<double>(base_delay.count()) *
                        std::pow(factor, static_cast<double>(std::max(retry, 1) - 1));
  const double capped = std::min(scaled, static_cast<double>(max_delay.count()));
  return std::chrono::milliseconds(static_cast<std::int64_t>(capped));
}

void ProviderProfile::validate() const {
  auto fail = [this](const std::string& what) {
    throw Error(ErrorCode::kInvalidArgument, "profile '" + name + "': " + what);
  };
  if (name.empty()) fail("name is empty");
  if (base_url.rfind("http://", 0) != 0 && base_url.rfind("https://", 0) != 0)
    fail("base_url must start with http:// or https://");
  if (model_id.empty()) fail("model_id is empty");
  for (const auto& p : supported_params) {
    if (std::find(kSamplingParams.begin(), kSamplingParams.end(), p) == kSamplingParams.end())
      fail("unknown sampling parameter '" + p + "'");
  }
  if (max_concurrency < 1) fail("max_concurrency must be at least 1");
  if (timeout.count() <= 0) fail("timeout must be positive");
  if (retry.max_attempts < 1) fail("max_attempts must be at least 1");
  if (retry.base_delay.count() < 0 || retry.max_delay.count() < 0) fail("backoff delays must be non-negative");
  if (!(retry.factor >= 1.0)) fail("backoff_factor must be at least 1");
}

namespace {

ProviderProfile profile_from_section(const detail::KvSection& section, std::string_view source) {
  ProviderProfile p;
  p.name = section.name;
  for (const auto& e : section.entries) {
    if (e.key == "name") {
      p.name = e.value;
    } else if (e.key == "base_url") {
      p.base_url = e.value;
      while (p.base_url.size() > 1 && p.base_url.back() == '/') p.base_url.pop_back();
    } else if (e.key == "model_id" || e.key == "model") {
      p.model_id = e.value;
    } else if (e.key == "auth_env_var") {
      p.auth_env_var = e.value;
    } else if (e.key == "supported_params") {
      p.supported_params.clear();
      for (auto& v : detail::split_list(e.value)) p.supported_params.insert(std::move(v));
    } else if (e.key == "max_concurrency") {
      p.max_concurrency = static_cast<int>(detail::parse_int(e, source));
    } else if (e.key == "timeout_seconds") {
      p.timeout = std::chrono::milliseconds(
          static_cast<std::int64_t>(std::llround(detail::parse_double(e, source) * 1000.0)));
    } else if (e.key == "max_attempts") {
      p.retry.max_attempts = static_cast<int>(detail::parse_int(e, source));
    } else if (e.key == "backoff_base_ms") {
      p.retry.base_delay = std::chrono::milliseconds(detail::parse_int(e, source));
    } else if (e.key == "backoff_factor") {
      p.retry.factor = detail::parse_double(e, source);
    } else if (e.key == "backoff_cap_ms") {
      p.retry.max_delay = std::chrono::milliseconds(detail::parse_int(e, source));
    } else {
      throw Error(ErrorCode::kInvalidArgument, std::string(source) + ":" + std::to_string(e.line) +
                                                   ": unknown profile key '" + e.key + "'");
    }
  }
  p.validate();
  return p;
}

}  // namespace

std::vector<ProviderProfile> parse_profiles(std::string_view text, std::string_view source) {
  const auto sections = detail::parse_kv(text, source);
  std::vector<ProviderProfile> out;
  const bool named = std::any_of(sections.begin(), sections.end(),
                                 [](const auto& s) { return !s.name.empty(); });
  for (const auto& s : sections) {
    if (s.name.empty()) {
      if (s.entries.empty()) continue;
      if (named)
        throw Error(ErrorCode::kInvalidArgument,
                    std::string(source) + ": entries outside a [profile] section");
    }
    out.push_back(profile_from_section(s, source));
  }
  if (out.empty()) throw Error(ErrorCode::kInvalidArgument, std::string(source) + ": no profiles");
  for (std::size_t i = 0; i < out.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (out[i].name == out[j].name)
        throw Error(ErrorCode::kInvalidArgument,
                    std::string(source) + ": duplicate profile '" + out[i].name + "'");
  return out;
}

std::vector<ProviderProfile> load_profiles(const std::filesystem::path& path) {
  return parse_profiles(detail::read_file(path), path.string());
}

ProviderProfile select_profile(std::span<const ProviderProfile> profiles, std::string_view name) {
  if (name.empty()) {
    if (profiles.size() == 1) return profiles.front();
    throw Error(ErrorCode::kInvalidArgument,
                "profile file holds several profiles; pick one with FILE:NAME");
  }
  for (const auto& p : profiles)
    if (p.name == name) return p;
  throw Error(ErrorCode::kInvalidArgument, "no profile named '" + std::string(name) + "'");
}

std::string format_profile(const ProviderProfile& p) {
  std::string params;
  for (auto k : kSamplingParams) {
    if (!p.supported_params.contains(k)) continue;
    if (!params.empty()) params += ", ";
    params += k;
  }
  std::string out = "[" + p.name + "]\n";
  out += "base_url = " + p.base_url + "\n";
  out += "model_id = " + p.model_id + "\n";
  out += "auth_env_var = " + p.auth_env_var + "\n";
  out += "supported_params = " + params + "\n";
  out += "max_concurrency = " + std::to_string(p.max_concurrency) + "\n";
  out += "timeout_seconds = " + detail::format_double(static_cast<double>(p.timeout.count()) / 1000.0) + "\n";
  out += "max_attempts = " + std::to_string(p.retry.max_attempts) + "\n";
  out += "backoff_base_ms = " + std::to_string(p.retry.base_delay.count()) + "\n";
  out += "backoff_factor = " + detail::format_double(p.retry.factor) + "\n";
  out += "backoff_cap_ms = " + std::to_string(p.retry.max_delay.count()) + "\n";
  return out;
}

RequestBody build_request_body(const ProviderProfile& profile, std::span<const ChatMessage> messages,
                               const InferenceConfig& config) {
  ojson body;
  body["model"] = profile.model_id;
  ojson msgs = ojson::array();
  for (const auto& m : messages) msgs.push_back(ojson{{"role", m.role}, {"content", m.content}});
  body["messages"] = std::move(msgs);

  RequestBody out;
  for (auto key : kSamplingParams) {
    if (!profile.supported_params.contains(key)) {
      out.dropped_params.emplace_back(key);
      continue;
    }
    const std::string k(key);
    if (key == "temperature") body[k] = config.temperature;
    else if (key == "top_p") body[k] = config.top_p;
    else if (key == "top_k") body[k] = config.top_k;
    else if (key == "max_tokens") body[k] = config.max_tokens;
    else if (key == "n") body[k] = config.n;
  }
  out.json = body.dump(-1, ' ', false, json::error_handler_t::replace);
  return out;
}

std::string parse_completion_text(std::string_view body) {
  json doc = json::parse(body, nullptr, false);
  auto fail = [](const std::string& why) {
    throw Error(ErrorCode::kProviderError, "unexpected completion body: " + why).with_http_status(200);
  };
  if (doc.is_discarded() || !doc.is_object()) fail("not a JSON object");
  auto choices = doc.find("choices");
  if (choices == doc.end() || !choices->is_array() || choices->empty()) fail("no choices");
  const auto& first = (*choices)[0];
  if (!first.is_object()) fail("choice is not an object");
  auto message = first.find("message");
  if (message == first.end() || !message->is_object()) fail("choice has no message");
  auto content = message->find("content");
  if (content == message->end()) fail("message has no content");
  if (content->is_null()) return {};
  if (!content->is_string()) fail("content is not a string");
  return content->get<std::string>();
}

std::optional<std::string> require_auth_token(const ProviderProfile& profile,
                                              const CompletionContext& context) {
  if (profile.auth_env_var.empty()) return std::nullopt;
  std::optional<std::string> value;
  if (context.getenv) {
    value = context.getenv(profile.auth_env_var);
  } else if (const char* raw = std::getenv(profile.auth_env_var.c_str())) {
    value = raw;
  }
  if (!value || value->empty())
    throw Error(ErrorCode::kAuthMissing, "environment variable " + profile.auth_env_var +
                                             " is not set (profile '" + profile.name + "')");
  return value;
}

namespace {

bool transient(const HttpResponse& r) {
  if (r.transport != TransportStatus::kOk) return true;
  return r.status == 408 || r.status == 429 || (r.status >= 500 && r.status <= 599);
}

std::string snippet(std::string_view body) {
  constexpr std::size_t kMax = 200;
  std::string s(body.substr(0, kMax));
  if (body.size() > kMax) s += "...";
  return s;
}

Error terminal_error(const HttpResponse& r, const ProviderProfile& profile, int attempts) {
  const std::string where = "profile '" + profile.name + "'";
  const std::string tries = " after " + std::to_string(attempts) + " attempt(s)";
  if (r.transport == TransportStatus::kTimeout)
    return Error(ErrorCode::kTimeout, where + ": request timed out" + tries)
        .with_attempts(attempts);
  if (r.transport == TransportStatus::kConnectionError)
    return Error(ErrorCode::kProviderError, where + ": " + r.error + tries)
        .with_http_status(0)
        .with_attempts(attempts);
  if (r.status == 429)
    return Error(ErrorCode::kRateLimited, where + ": rate limited" + tries)
        .with_http_status(429)
        .with_attempts(attempts);
  return Error(ErrorCode::kProviderError,
               where + ": HTTP " + std::to_string(r.status) + tries + ": " + snippet(r.body))
      .with_http_status(r.status)
      .with_attempts(attempts);
}

std::uint64_t jitter_stream(std::uint64_t seed) {
  static std::atomic<std::uint64_t> counter{0};
  if (seed == 0) {
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd() ^ ++counter;
  }
  return seed;
}

// Unsupported-parameter notices are logged once per profile and parameter.
bool first_notice(const std::string& key) {
  static std::mutex mutex;
  static std::set<std::string> seen;
  std::lock_guard lock(mutex);
  return seen.insert(key).second;
}

}  // namespace

CompletionResult complete(const ProviderProfile& profile, std::span<const ChatMessage> messages,
                          const InferenceConfig& config, const CompletionContext& context) {
  const auto token = require_auth_token(profile, context);
  auto transport = context.transport ? context.transport : make_http_transport();
  auto log = context.log ? context.log : [](std::string_view msg) { std::clog << msg << '\n'; };
  auto sleep = context.sleep ? context.sleep
                             : [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };

  const RequestBody body = build_request_body(profile, messages, config);
  for (const auto& p : body.dropped_params)
    if (first_notice(profile.name + "\n" + p)) log(profile.name + ": not sending unsupported parameter " + p);

  HttpRequest request;
  request.url = profile.base_url + "/chat/completions";
  request.headers.emplace_back("Content-Type", "application/json");
  if (token) request.headers.emplace_back("Authorization", "Bearer " + *token);
  request.body = body.json;
  request.timeout = profile.timeout;

  SplitMix64 rng(jitter_stream(context.jitter_seed));
  const auto started = std::chrono::steady_clock::now();
  for (int attempt = 1;; ++attempt) {
    const HttpResponse response = transport->post(request);
    if (response.transport == TransportStatus::kOk && response.status >= 200 && response.status < 300) {
      CompletionResult result;
      try {
        result.text = parse_completion_text(response.body);
      } catch (Error& e) {
        throw e.with_attempts(attempt);
      }
      result.attempts = attempt;
      result.latency = std::chrono::duration_cast<std::chrono::milliseconds>(
          std::chrono::steady_clock::now() - started);
      return result;
    }
    if (!transient(response) || attempt >= profile.retry.max_attempts)
      throw terminal_error(response, profile, attempt);

    const auto window = profile.retry.ceiling(attempt);
    auto delay = std::chrono::milliseconds(
        static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(window.count()) + 1)));
    if (response.retry_after) {
      auto hinted = std::chrono::duration_cast<std::chrono::milliseconds>(*response.retry_after);
      delay = std::max(delay, std::min(hinted, profile.retry.max_delay));
    }
    log(profile.name + ": attempt " + std::to_string(attempt) + " failed (" +
        (response.transport == TransportStatus::kOk ? "HTTP " + std::to_string(response.status)
                                                    : response.error) +
        "), retrying in " + std::to_string(delay.count()) + " ms");
    sleep(delay);
  }
}

}  // namespace eot
