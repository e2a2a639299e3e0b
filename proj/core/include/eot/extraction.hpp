#pragma once

// Turns raw model responses into EotOutput.
//
// Two of the four self-check conditions are enforced here: every kept
// emotion is a label from the fixed set (faithfulness) and every kept
// trigger is a verbatim review substring (verifiability). Emotion and
// trigger coverage cannot be checked without gold; they show up as recall
// in the metrics instead.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eot/types.hpp"

namespace eot {

enum class DropReason : std::uint8_t {
  kOov,                  // label is not one of the nine emotions
  kMalformed,            // entry does not match the schema
  kNotExtractive,        // trigger is not a substring of the review
  kNoVerifiableTrigger,  // emotion lost all of its triggers
  kNeutralConflict,      // Neutral listed next to other emotions
  kNeutralTrigger,       // trigger attached to Neutral
};

enum class ParseStatus : std::uint8_t { kClean, kRepaired, kUnparseable };

std::string_view to_string(DropReason reason) noexcept;
std::string_view to_string(ParseStatus status) noexcept;
std::optional<ParseStatus> parse_parse_status(std::string_view raw) noexcept;

struct DroppedTrigger {
  std::string emotion;
  std::string text;
  DropReason reason;

  friend bool operator==(const DroppedTrigger&, const DroppedTrigger&) = default;
};

struct DroppedEmotion {
  std::string label;
  DropReason reason;

  friend bool operator==(const DroppedEmotion&, const DroppedEmotion&) = default;
};

struct ParseReport {
  EotOutput output;  // may have no pairs
  std::vector<DroppedTrigger> dropped_triggers;
  std::vector<DroppedEmotion> dropped_emotions;
  bool repair_applied = false;
  ParseStatus parse_status = ParseStatus::kClean;
  std::string error;  // why the response was unparseable

  friend bool operator==(const ParseReport&, const ParseReport&) = default;
};

/// Text of the first balanced `{...}` block in `raw`, ignoring braces inside
/// JSON strings. When several blocks exist, the first one that parses as an
/// object with an "emotions" key wins, then the first that parses at all,
/// then the first balanced one. Throws Error(kNoStructuredBlock).
std::string extract_structured_block(std::string_view raw);

/// Never throws on any input. Triggers that do not occur verbatim get one
/// relaxed retry (case and whitespace only); any other mismatch drops them.
ParseReport parse_output(std::string_view raw, const Review& review);

/// `{"format_version", "review_id", "parse_status", "emotions", "dropped"}`
std::string format_parsed(std::span<const ParseReport> reports);

}  // namespace eot
