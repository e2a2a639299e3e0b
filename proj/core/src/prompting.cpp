#include "eot/prompting.hpp"

#include "eot/error.hpp"
#include "kv.hpp"

namespace eot {

namespace {

#include "prompt_assets.inc"

std::string review_block(const Review& review) {
  std::string block(kReviewHeader);
  block += '\n';
  block += review.text;
  block += '\n';
  block += kReviewFooter;
  return block;
}

}  // namespace

std::string_view to_string(Strategy s) noexcept {
  switch (s) {
    case Strategy::kZeroShot: return "zs";
    case Strategy::kZeroShotCoT: return "zs-cot";
    case Strategy::kEotDetect: return "eot-detect";
  }
  return "unknown";
}

std::optional<Strategy> parse_strategy(std::string_view raw) noexcept {
  for (auto s : {Strategy::kZeroShot, Strategy::kZeroShotCoT, Strategy::kEotDetect}) {
    if (raw == to_string(s)) return s;
  }
  return std::nullopt;
}

std::string_view prompt_version() noexcept { return kPromptVersion; }

PromptSpec build_prompt(Strategy strategy, const Review& review) {
  PromptSpec spec;
  spec.strategy = strategy;
  spec.review_block = review_block(review);
  spec.output_contract = std::string(kOutputContract);
  switch (strategy) {
    case Strategy::kZeroShot:
      spec.task_description = std::string(kZsTask);
      break;
    case Strategy::kZeroShotCoT:
      spec.task_description = std::string(kZsTask) + "\n\n" + std::string(kCotDirective);
      break;
    case Strategy::kEotDetect:
      spec.system_message = std::string(kEotSystem);
      spec.task_description = std::string(kEotTask);
      spec.instructions = {std::string(kEotInstruction1), std::string(kEotInstruction2),
                           std::string(kEotInstruction3), std::string(kEotInstruction4),
                           std::string(kEotInstruction5)};
      break;
  }
  return spec;
}

std::vector<ChatMessage> render_messages(const PromptSpec& spec) {
  std::string user = spec.task_description;
  if (!spec.instructions.empty()) {
    user += "\n\nInstructions:";
    for (const auto& step : spec.instructions) {
      user += '\n';
      user += step;
    }
  }
  user += "\n\n";
  user += spec.review_block;
  user += "\n\n";
  user += spec.output_contract;

  std::vector<ChatMessage> messages;
  if (spec.strategy == Strategy::kEotDetect) messages.push_back({"system", spec.system_message});
  messages.push_back({"user", std::move(user)});
  return messages;
}

std::string format_messages(const std::vector<ChatMessage>& messages) {
  std::string out;
  for (const auto& m : messages) {
    out += "=== " + m.role + " ===\n";
    out += m.content;
    out += '\n';
  }
  return out;
}

void InferenceConfig::validate() const {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidArgument, "inference config: " + what);
  };
  if (!(temperature >= 0)) fail("temperature must be >= 0");
  if (!(top_p > 0 && top_p <= 1)) fail("top_p must be in (0, 1]");
  if (top_k < 1) fail("top_k must be >= 1");
  if (max_tokens < 1) fail("max_tokens must be >= 1");
  if (n < 1) fail("n must be >= 1");
}

InferenceConfig default_config() noexcept { return InferenceConfig{}; }

InferenceConfig parse_config(std::string_view text, std::string_view source) {
  InferenceConfig config;
  const auto sections = detail::parse_kv(text, source);
  if (sections.size() != 1) {
    throw Error(ErrorCode::kInvalidArgument, std::string(source) + ": config files have no sections");
  }
  for (const auto& entry : sections.front().entries) {
    if (entry.key == "temperature") {
      config.temperature = detail::parse_double(entry, source);
    } else if (entry.key == "top_p") {
      config.top_p = detail::parse_double(entry, source);
    } else if (entry.key == "top_k") {
      config.top_k = detail::parse_int(entry, source);
    } else if (entry.key == "max_tokens") {
      config.max_tokens = detail::parse_int(entry, source);
    } else if (entry.key == "n") {
      config.n = detail::parse_int(entry, source);
    } else {
      throw Error(ErrorCode::kInvalidArgument, std::string(source) + ":" +
                                                   std::to_string(entry.line) + ": unknown key '" +
                                                   entry.key + "'");
    }
  }
  config.validate();
  return config;
}

InferenceConfig load_config(const std::filesystem::path& path) {
  return parse_config(detail::read_file(path), path.string());
}

std::string format_config(const InferenceConfig& config) {
  return "temperature = " + detail::format_double(config.temperature) + "\n" +
         "top_p = " + detail::format_double(config.top_p) + "\n" +
         "top_k = " + std::to_string(config.top_k) + "\n" +
         "max_tokens = " + std::to_string(config.max_tokens) + "\n" +
         "n = " + std::to_string(config.n) + "\n";
}

}  // namespace eot
