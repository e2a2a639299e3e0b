#include "eot/types.hpp"

#include <algorithm>

#include "eot/error.hpp"
#include "eot/text.hpp"

namespace eot {

namespace {

constexpr std::array<std::string_view, kEmotionCount> kEmotionNames{
    "Joy", "Trust", "Fear", "Surprise", "Sadness",
    "Disgust", "Anger", "Anticipation", "Neutral"};

constexpr std::array<std::string_view, kDomainCount> kDomainNames{
    "Beauty", "Clothing", "Home", "Electronics", "TripAdvisor", "Yelp"};

std::string_view trim(std::string_view s) {
  constexpr std::string_view kWs = " \t\r\n\v\f";
  const auto first = s.find_first_not_of(kWs);
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(kWs);
  return s.substr(first, last - first + 1);
}

bool iequals_ascii(std::string_view a, std::string_view b) {
  return std::equal(a.begin(), a.end(), b.begin(), b.end(), [](char x, char y) {
    auto lower = [](char c) {
      return (c >= 'A' && c <= 'Z') ? static_cast<char>(c + 32) : c;
    };
    return lower(x) == lower(y);
  });
}

struct FoldedText {
  std::u32string chars;            // folded, whitespace runs collapsed
  std::vector<std::size_t> origin; // index into the original code points
};

FoldedText fold_and_collapse(const std::u32string& cps) {
  FoldedText out;
  bool pending_space = false;
  std::size_t space_origin = 0;
  for (std::size_t i = 0; i < cps.size(); ++i) {
    if (is_space(cps[i])) {
      if (!pending_space && !out.chars.empty()) space_origin = i;
      pending_space = !out.chars.empty();
      continue;
    }
    if (pending_space) {
      out.chars.push_back(U' ');
      out.origin.push_back(space_origin);
    }
    pending_space = false;
    out.chars.push_back(fold_case(cps[i]));
    out.origin.push_back(i);
  }
  return out;
}

}  // namespace

std::string_view to_string(Emotion e) noexcept { return kEmotionNames[index_of(e)]; }

std::optional<Emotion> try_canonical_emotion(std::string_view raw) noexcept {
  const std::string_view t = trim(raw);
  for (Emotion e : kAllEmotions) {
    if (iequals_ascii(t, kEmotionNames[index_of(e)])) return e;
  }
  return std::nullopt;
}

Emotion canonical_emotion(std::string_view raw) {
  if (auto e = try_canonical_emotion(raw)) return *e;
  throw Error(ErrorCode::kUnknownEmotion, "'" + std::string(raw) + "'");
}

std::string_view to_string(Domain d) noexcept { return kDomainNames[index_of(d)]; }

std::string_view to_string(Source s) noexcept {
  switch (s) {
    case Source::kAmazon: return "Amazon";
    case Source::kTripAdvisor: return "TripAdvisor";
    case Source::kYelp: return "Yelp";
  }
  return "Unknown";
}

std::optional<Domain> parse_domain(std::string_view raw) noexcept {
  const std::string_view t = trim(raw);
  for (Domain d : kAllDomains) {
    if (iequals_ascii(t, kDomainNames[index_of(d)])) return d;
  }
  return std::nullopt;
}

Source source_of(Domain d) noexcept {
  switch (d) {
    case Domain::kTripAdvisor: return Source::kTripAdvisor;
    case Domain::kYelp: return Source::kYelp;
    default: return Source::kAmazon;
  }
}

void validate(const Review& review) {
  if (review.review_id.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "review_id is empty");
  }
  const auto cps = decode_utf8(review.text);
  if (std::all_of(cps.begin(), cps.end(), is_space)) {
    throw Error(ErrorCode::kInvalidArgument,
                "review " + review.review_id + " has blank text");
  }
}

ReviewIndex index_reviews(std::span<const Review> reviews) {
  ReviewIndex index;
  for (const auto& r : reviews) {
    if (!index.emplace(r.review_id, r).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate review_id " + r.review_id);
    }
  }
  return index;
}

TriggerSpan TriggerSpan::at(std::u32string_view review_text, std::size_t start,
                            std::size_t end) {
  if (start >= end || end > review_text.size()) {
    throw Error(ErrorCode::kInvalidSpan,
                "span [" + std::to_string(start) + ", " + std::to_string(end) +
                    ") outside review of length " +
                    std::to_string(review_text.size()));
  }
  return TriggerSpan(encode_utf8(review_text.substr(start, end - start)), start, end);
}

TriggerSpan TriggerSpan::at(std::string_view review_text, std::size_t start,
                            std::size_t end) {
  return at(std::u32string_view(decode_utf8(review_text)), start, end);
}

std::optional<TriggerSpan> locate_span(std::string_view review_text,
                                       std::string_view trigger) {
  if (trigger.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "trigger text is empty");
  }
  const std::u32string haystack = decode_utf8(review_text);
  const std::u32string needle = decode_utf8(trigger);
  const auto pos = haystack.find(needle);
  if (pos == std::u32string::npos) return std::nullopt;
  return TriggerSpan::at(std::u32string_view(haystack), pos, pos + needle.size());
}

std::optional<TriggerSpan> locate_span_relaxed(std::string_view review_text,
                                               std::string_view trigger) {
  const std::u32string haystack = decode_utf8(review_text);
  const FoldedText folded_review = fold_and_collapse(haystack);
  const FoldedText folded_trigger = fold_and_collapse(decode_utf8(trigger));
  if (folded_trigger.chars.empty()) return std::nullopt;
  const auto pos = folded_review.chars.find(folded_trigger.chars);
  if (pos == std::u32string::npos) return std::nullopt;
  const std::size_t last = pos + folded_trigger.chars.size() - 1;
  return TriggerSpan::at(std::u32string_view(haystack), folded_review.origin[pos],
                         folded_review.origin[last] + 1);
}

const EmotionTriggers* EotOutput::find(Emotion e) const noexcept {
  for (const auto& pair : pairs) {
    if (pair.emotion == e) return &pair;
  }
  return nullptr;
}

EmotionSet EotOutput::emotion_set() const noexcept {
  EmotionSet set;
  for (const auto& pair : pairs) set.set(index_of(pair.emotion));
  return set;
}

EotOutput neutral_output(std::string review_id) {
  return EotOutput{std::move(review_id), {EmotionTriggers{Emotion::kNeutral, {}}}};
}

void validate(const EotOutput& output, const Review& review) {
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::kInvalidOutput, "review " + output.review_id + ": " + what);
  };
  if (output.review_id != review.review_id) fail("review id mismatch with " + review.review_id);
  EmotionSet seen;
  const std::u32string text = decode_utf8(review.text);
  for (const auto& pair : output.pairs) {
    if (seen.test(index_of(pair.emotion))) {
      fail("duplicate emotion " + std::string(to_string(pair.emotion)));
    }
    seen.set(index_of(pair.emotion));
    if (pair.emotion == Emotion::kNeutral) {
      if (output.pairs.size() != 1) fail("Neutral must be the only emotion");
      if (!pair.triggers.empty()) fail("Neutral carries no triggers");
      continue;
    }
    if (pair.triggers.empty()) {
      fail(std::string(to_string(pair.emotion)) + " has no triggers");
    }
    for (const auto& t : pair.triggers) {
      if (t.end() > text.size() ||
          encode_utf8(std::u32string_view(text).substr(t.start(), t.length())) != t.text()) {
        fail("trigger '" + t.text() + "' is not the review substring at its offsets");
      }
    }
  }
}

}  // namespace eot
