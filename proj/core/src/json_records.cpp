#include "json_records.hpp"

#include "eot/error.hpp"
#include "eot/text.hpp"

namespace eot::detail {

namespace {

[[noreturn]] void malformed(std::string_view what, const std::string& why) {
  throw Error(ErrorCode::kMalformedRecord, std::string(what) + ": " + why);
}

}  // namespace

std::string dump_line(const ojson& value) {
  return value.dump(-1, ' ', false, ojson::error_handler_t::replace);
}

json parse_json(std::string_view text, std::string_view what) {
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) malformed(what, "invalid JSON");
  return value;
}

const json& require(const json& object, std::string_view key, std::string_view what) {
  if (!object.is_object()) malformed(what, "expected an object");
  const auto it = object.find(key);
  if (it == object.end()) malformed(what, "missing field '" + std::string(key) + "'");
  return *it;
}

std::string require_string(const json& object, std::string_view key,
                           std::string_view what) {
  const json& v = require(object, key, what);
  if (!v.is_string()) malformed(what, "field '" + std::string(key) + "' must be a string");
  return v.get<std::string>();
}

ojson review_to_json(const Review& review) {
  ojson out;
  out["review_id"] = review.review_id;
  out["text"] = review.text;
  out["domain"] = std::string(to_string(review.domain));
  out["item_id"] = review.item_id;
  if (review.timestamp) out["timestamp"] = *review.timestamp;
  return out;
}

Review review_from_json(const json& value) {
  constexpr std::string_view kWhat = "review";
  Review r;
  r.review_id = require_string(value, "review_id", kWhat);
  r.text = require_string(value, "text", kWhat);
  const auto domain = parse_domain(require_string(value, "domain", kWhat));
  if (!domain) malformed(kWhat, "unknown domain '" + value["domain"].get<std::string>() + "'");
  r.domain = *domain;
  r.item_id = require_string(value, "item_id", kWhat);
  if (const auto it = value.find("timestamp"); it != value.end() && !it->is_null()) {
    if (!it->is_number_integer()) malformed(kWhat, "timestamp must be an integer");
    r.timestamp = it->get<std::int64_t>();
  }
  try {
    validate(r);
  } catch (const Error& e) {
    malformed(kWhat, e.what());
  }
  return r;
}

ojson emotions_to_json(const EotOutput& output) {
  ojson emotions = ojson::array();
  for (const auto& pair : output.pairs) {
    ojson triggers = ojson::array();
    for (const auto& t : pair.triggers) triggers.push_back(t.text());
    ojson entry;
    entry["emotion"] = std::string(to_string(pair.emotion));
    entry["triggers"] = std::move(triggers);
    emotions.push_back(std::move(entry));
  }
  return emotions;
}

EotOutput output_from_json(const json& value, const Review& review) {
  const std::string what = "record for review " + review.review_id;
  EotOutput out;
  out.review_id = require_string(value, "review_id", what);
  const json& emotions = require(value, "emotions", what);
  if (!emotions.is_array()) malformed(what, "'emotions' must be an array");
  if (emotions.empty()) malformed(what, "'emotions' is empty; use Neutral");
  const std::u32string text = decode_utf8(review.text);
  for (const auto& entry : emotions) {
    const std::string raw = require_string(entry, "emotion", what);
    const auto emotion = try_canonical_emotion(raw);
    if (!emotion) malformed(what, "unknown emotion '" + raw + "'");
    EmotionTriggers pair{*emotion, {}};
    if (const auto it = entry.find("triggers"); it != entry.end()) {
      if (!it->is_array()) malformed(what, "'triggers' must be an array");
      for (const auto& t : *it) {
        if (t.is_string()) {
          const auto trigger = t.get<std::string>();
          if (trigger.empty()) malformed(what, "empty trigger");
          auto span = locate_span(review.text, trigger);
          if (!span) malformed(what, "trigger '" + trigger + "' is not a review substring");
          pair.triggers.push_back(std::move(*span));
        } else if (t.is_object()) {
          const auto trigger = require_string(t, "text", what);
          const json& start = require(t, "start", what);
          const json& end = require(t, "end", what);
          if (!start.is_number_unsigned() || !end.is_number_unsigned()) {
            malformed(what, "trigger offsets must be non-negative integers");
          }
          try {
            auto span = TriggerSpan::at(std::u32string_view(text), start.get<std::size_t>(),
                                        end.get<std::size_t>());
            if (span.text() != trigger) {
              malformed(what, "trigger '" + trigger + "' does not match its offsets");
            }
            pair.triggers.push_back(std::move(span));
          } catch (const Error& e) {
            if (e.code() == ErrorCode::kMalformedRecord) throw;
            malformed(what, e.what());
          }
        } else {
          malformed(what, "trigger must be a string or an object");
        }
      }
    }
    out.pairs.push_back(std::move(pair));
  }
  try {
    validate(out, review);
  } catch (const Error& e) {
    malformed(what, e.what());
  }
  return out;
}

}  // namespace eot::detail
