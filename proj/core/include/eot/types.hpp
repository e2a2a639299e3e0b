#pragma once

#include <array>
#include <bitset>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace eot {

// ---------------------------------------------------------------------------
// Emotion labels: Plutchik's eight primary emotions plus Neutral.

enum class Emotion : std::uint8_t {
  kJoy,
  kTrust,
  kFear,
  kSurprise,
  kSadness,
  kDisgust,
  kAnger,
  kAnticipation,
  kNeutral,
};

inline constexpr std::size_t kEmotionCount = 9;
inline constexpr std::array<Emotion, kEmotionCount> kAllEmotions{
    Emotion::kJoy,     Emotion::kTrust,   Emotion::kFear,
    Emotion::kSurprise, Emotion::kSadness, Emotion::kDisgust,
    Emotion::kAnger,   Emotion::kAnticipation, Emotion::kNeutral};

constexpr std::size_t index_of(Emotion e) noexcept {
  return static_cast<std::size_t>(e);
}

std::string_view to_string(Emotion e) noexcept;

/// Case-insensitive, trimmed match against the nine label names. No
/// synonyms are accepted; throws Error(kUnknownEmotion) otherwise.
Emotion canonical_emotion(std::string_view raw);
std::optional<Emotion> try_canonical_emotion(std::string_view raw) noexcept;

using EmotionSet = std::bitset<kEmotionCount>;

// ---------------------------------------------------------------------------
// Review metadata.

enum class Domain : std::uint8_t {
  kBeauty,
  kClothing,
  kHome,
  kElectronics,
  kTripAdvisor,
  kYelp,
};

inline constexpr std::size_t kDomainCount = 6;
inline constexpr std::array<Domain, kDomainCount> kAllDomains{
    Domain::kBeauty, Domain::kClothing,    Domain::kHome,
    Domain::kElectronics, Domain::kTripAdvisor, Domain::kYelp};

enum class Source : std::uint8_t { kAmazon, kTripAdvisor, kYelp };

constexpr std::size_t index_of(Domain d) noexcept {
  return static_cast<std::size_t>(d);
}
std::string_view to_string(Domain d) noexcept;
std::string_view to_string(Source s) noexcept;
std::optional<Domain> parse_domain(std::string_view raw) noexcept;
Source source_of(Domain d) noexcept;

struct Review {
  std::string review_id;
  std::string text;
  Domain domain = Domain::kBeauty;
  std::optional<std::int64_t> timestamp;  // epoch seconds
  std::string item_id;
};

/// Throws Error(kInvalidArgument) for an empty id or blank text.
void validate(const Review& review);

using ReviewIndex = std::map<std::string, Review, std::less<>>;

/// Throws Error(kInvalidArgument) on duplicate review ids.
ReviewIndex index_reviews(std::span<const Review> reviews);

// ---------------------------------------------------------------------------
// Opinion triggers.

/// A verbatim substring of a review, addressed by code point offsets.
/// Instances can only be created through checked factories, so
/// `review_text[start, end) == text` holds for every live object.
class TriggerSpan {
 public:
  /// Throws Error(kInvalidSpan) unless start < end <= length(review_text).
  static TriggerSpan at(std::string_view review_text, std::size_t start,
                        std::size_t end);
  static TriggerSpan at(std::u32string_view review_text, std::size_t start,
                        std::size_t end);

  const std::string& text() const noexcept { return text_; }
  std::size_t start() const noexcept { return start_; }
  std::size_t end() const noexcept { return end_; }
  std::size_t length() const noexcept { return end_ - start_; }

  bool overlaps(const TriggerSpan& other) const noexcept {
    return start_ < other.end_ && other.start_ < end_;
  }

  friend bool operator==(const TriggerSpan&, const TriggerSpan&) = default;

 private:
  TriggerSpan(std::string text, std::size_t start, std::size_t end)
      : text_(std::move(text)), start_(start), end_(end) {}

  std::string text_;
  std::size_t start_;
  std::size_t end_;
};

/// Leftmost exact occurrence of `trigger` in `review_text`.
/// Throws Error(kInvalidArgument) when `trigger` is empty.
std::optional<TriggerSpan> locate_span(std::string_view review_text,
                                       std::string_view trigger);

/// Leftmost occurrence under case folding and whitespace collapsing. The
/// returned span carries the review's original characters.
std::optional<TriggerSpan> locate_span_relaxed(std::string_view review_text,
                                               std::string_view trigger);

// ---------------------------------------------------------------------------
// Emotion / trigger assignments for one review.

struct EmotionTriggers {
  Emotion emotion;
  std::vector<TriggerSpan> triggers;

  friend bool operator==(const EmotionTriggers&,
                         const EmotionTriggers&) = default;
};

struct EotOutput {
  std::string review_id;
  std::vector<EmotionTriggers> pairs;

  const EmotionTriggers* find(Emotion e) const noexcept;
  bool has(Emotion e) const noexcept { return find(e) != nullptr; }
  EmotionSet emotion_set() const noexcept;

  friend bool operator==(const EotOutput&, const EotOutput&) = default;
};

EotOutput neutral_output(std::string review_id);

/// Checks the output invariants (Neutral exclusivity, unique emotions,
/// non-Neutral pairs carry triggers) and the extractive constraint against
/// `review`. Throws Error(kInvalidOutput).
void validate(const EotOutput& output, const Review& review);

}  // namespace eot
