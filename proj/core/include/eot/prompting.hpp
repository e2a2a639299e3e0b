#pragma once

// Prompt construction for the three strategies: zero-shot, zero-shot
// chain-of-thought, and the structured EOT-DETECT prompt <S, T, I, R>.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "eot/types.hpp"

namespace eot {

enum class Strategy : std::uint8_t { kZeroShot, kZeroShotCoT, kEotDetect };

/// "zs", "zs-cot", "eot-detect".
std::string_view to_string(Strategy s) noexcept;
std::optional<Strategy> parse_strategy(std::string_view raw) noexcept;

/// Version tag of the compiled-in template set; recorded with every run.
std::string_view prompt_version() noexcept;

/// Names of the four self-check conditions, in prompt order.
inline constexpr std::array<std::string_view, 4> kSelfCheckConditions{
    "Emotion Coverage", "Trigger Coverage", "Emotion Faithfulness",
    "Opinion Trigger Verifiability"};

struct PromptSpec {
  Strategy strategy = Strategy::kZeroShot;
  std::string system_message;            // S; empty for ZS and ZS-CoT
  std::string task_description;          // T
  std::vector<std::string> instructions; // I1..I5; empty for ZS and ZS-CoT
  std::string review_block;              // R
  std::string output_contract;
};

PromptSpec build_prompt(Strategy strategy, const Review& review);

struct ChatMessage {
  std::string role;  // "system" or "user"
  std::string content;

  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

/// EOT-DETECT renders as a system message plus one user message (T, I, R);
/// the zero-shot strategies render as a single user message.
std::vector<ChatMessage> render_messages(const PromptSpec& spec);

/// Plain-text dump of the messages, used for golden snapshots and `prompt`.
std::string format_messages(const std::vector<ChatMessage>& messages);

// ---------------------------------------------------------------------------

struct InferenceConfig {
  double temperature = 0.2;
  double top_p = 0.95;
  std::int64_t top_k = 25;  // advisory; dropped for providers without support
  std::int64_t max_tokens = 2500;
  std::int64_t n = 1;

  /// Throws Error(kInvalidArgument).
  void validate() const;
  friend bool operator==(const InferenceConfig&, const InferenceConfig&) = default;
};

InferenceConfig default_config() noexcept;

/// Key/value form: `temperature = 0.2` and so on. Missing keys keep the
/// defaults; unknown keys are rejected.
InferenceConfig parse_config(std::string_view text, std::string_view source = "<config>");
InferenceConfig load_config(const std::filesystem::path& path);
std::string format_config(const InferenceConfig& config);

}  // namespace eot
