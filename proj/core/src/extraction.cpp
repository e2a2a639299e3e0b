#include "eot/extraction.hpp"

#include <algorithm>
#include <optional>

#include "eot/error.hpp"
#include "eot/text.hpp"
#include "json_records.hpp"

namespace eot {

using detail::json;
using detail::ojson;

std::string_view to_string(DropReason reason) noexcept {
  switch (reason) {
    case DropReason::kOov: return "OOV";
    case DropReason::kMalformed: return "Malformed";
    case DropReason::kNotExtractive: return "NotExtractive";
    case DropReason::kNoVerifiableTrigger: return "NoVerifiableTrigger";
    case DropReason::kNeutralConflict: return "NeutralConflict";
    case DropReason::kNeutralTrigger: return "NeutralTrigger";
  }
  return "?";
}

std::string_view to_string(ParseStatus status) noexcept {
  switch (status) {
    case ParseStatus::kClean: return "Clean";
    case ParseStatus::kRepaired: return "Repaired";
    case ParseStatus::kUnparseable: return "Unparseable";
  }
  return "?";
}

std::optional<ParseStatus> parse_parse_status(std::string_view raw) noexcept {
  for (auto s : {ParseStatus::kClean, ParseStatus::kRepaired, ParseStatus::kUnparseable})
    if (raw == to_string(s)) return s;
  return std::nullopt;
}

namespace {

// End (exclusive) of the balanced object starting at raw[open], or npos.
std::size_t balanced_end(std::string_view raw, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = open; i < raw.size(); ++i) {
    const char c = raw[i];
    if (in_string) {
      if (escaped) escaped = false;
      else if (c == '\\') escaped = true;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') in_string = true;
    else if (c == '{') ++depth;
    else if (c == '}' && --depth == 0) return i + 1;
  }
  return std::string_view::npos;
}

}  // namespace

std::string extract_structured_block(std::string_view raw) {
  std::optional<std::string_view> first_balanced, first_json;
  std::size_t pos = 0;
  while ((pos = raw.find('{', pos)) != std::string_view::npos) {
    const std::size_t end = balanced_end(raw, pos);
    if (end == std::string_view::npos) {
      ++pos;
      continue;
    }
    const std::string_view block = raw.substr(pos, end - pos);
    if (!first_balanced) first_balanced = block;
    const json doc = json::parse(block, nullptr, false);
    if (!doc.is_discarded() && doc.is_object()) {
      if (doc.contains("emotions")) return std::string(block);
      if (!first_json) first_json = block;
      pos = end;  // skip this block's nested objects
    } else {
      ++pos;
    }
  }
  if (first_json) return std::string(*first_json);
  if (first_balanced) return std::string(*first_balanced);
  throw Error(ErrorCode::kNoStructuredBlock, "response contains no {...} block");
}

namespace {

std::string label_of(const json& v) {
  return v.is_string() ? v.get<std::string>() : v.dump(-1, ' ', false, json::error_handler_t::replace);
}

struct Draft {
  Emotion emotion;
  std::string label;
  std::vector<TriggerSpan> triggers;
};

ParseReport unparseable(ParseReport report, std::string why) {
  report.output.pairs.clear();
  report.parse_status = ParseStatus::kUnparseable;
  report.error = std::move(why);
  return report;
}

}  // namespace

ParseReport parse_output(std::string_view raw, const Review& review) {
  ParseReport report;
  report.output.review_id = review.review_id;

  std::string block;
  try {
    block = extract_structured_block(raw);
  } catch (const Error&) {
    return unparseable(std::move(report), "no structured block");
  }
  const json doc = json::parse(block, nullptr, false);
  if (doc.is_discarded()) return unparseable(std::move(report), "block is not valid JSON");
  if (!doc.is_object()) return unparseable(std::move(report), "block is not an object");
  const auto emotions = doc.find("emotions");
  if (emotions == doc.end() || !emotions->is_array())
    return unparseable(std::move(report), "no \"emotions\" array");

  std::vector<Draft> drafts;
  for (const auto& entry : *emotions) {
    if (!entry.is_object() || !entry.contains("emotion")) {
      report.dropped_emotions.push_back({label_of(entry), DropReason::kMalformed});
      continue;
    }
    const json& label = entry["emotion"];
    if (!label.is_string()) {
      report.dropped_emotions.push_back({label_of(label), DropReason::kMalformed});
      continue;
    }
    const std::string name = label.get<std::string>();
    const auto emotion = try_canonical_emotion(name);
    if (!emotion) {
      report.dropped_emotions.push_back({name, DropReason::kOov});
      continue;
    }
    auto draft = std::find_if(drafts.begin(), drafts.end(),
                              [&](const Draft& d) { return d.emotion == *emotion; });
    if (draft == drafts.end()) {
      drafts.push_back({*emotion, name, {}});
      draft = std::prev(drafts.end());
    }
    const std::string emotion_name(to_string(*emotion));

    const auto triggers = entry.find("triggers");
    if (triggers == entry.end() || triggers->is_null()) continue;
    if (!triggers->is_array()) {
      report.dropped_triggers.push_back({emotion_name, label_of(*triggers), DropReason::kMalformed});
      continue;
    }
    for (const auto& t : *triggers) {
      std::optional<std::string> text;
      if (t.is_string()) text = t.get<std::string>();
      else if (t.is_object() && t.contains("text") && t["text"].is_string()) text = t["text"].get<std::string>();
      if (!text || normalize_text(*text).empty()) {
        report.dropped_triggers.push_back({emotion_name, label_of(t), DropReason::kMalformed});
        continue;
      }
      if (*emotion == Emotion::kNeutral) {
        report.dropped_triggers.push_back({emotion_name, *text, DropReason::kNeutralTrigger});
        continue;
      }
      std::optional<TriggerSpan> span = locate_span(review.text, *text);
      if (!span) {
        span = locate_span_relaxed(review.text, *text);
        if (span) report.repair_applied = true;
      }
      if (!span) {
        report.dropped_triggers.push_back({emotion_name, *text, DropReason::kNotExtractive});
        continue;
      }
      if (std::find(draft->triggers.begin(), draft->triggers.end(), *span) == draft->triggers.end())
        draft->triggers.push_back(std::move(*span));
    }
  }

  bool has_other = false;
  for (const auto& d : drafts) {
    if (d.emotion != Emotion::kNeutral && !d.triggers.empty()) has_other = true;
  }
  for (auto& d : drafts) {
    if (d.emotion == Emotion::kNeutral) {
      if (has_other) {
        report.dropped_emotions.push_back({d.label, DropReason::kNeutralConflict});
        continue;
      }
      report.output.pairs.push_back({Emotion::kNeutral, {}});
      continue;
    }
    if (d.triggers.empty()) {
      report.dropped_emotions.push_back({d.label, DropReason::kNoVerifiableTrigger});
      continue;
    }
    report.output.pairs.push_back({d.emotion, std::move(d.triggers)});
  }
  report.parse_status = report.repair_applied ? ParseStatus::kRepaired : ParseStatus::kClean;
  return report;
}

std::string format_parsed(std::span<const ParseReport> reports) {
  std::string out;
  for (const auto& r : reports) {
    ojson doc;
    doc["format_version"] = detail::kFormatVersion;
    doc["review_id"] = r.output.review_id;
    doc["parse_status"] = to_string(r.parse_status);
    doc["repair_applied"] = r.repair_applied;
    doc["emotions"] = detail::emotions_to_json(r.output);
    ojson dropped_e = ojson::array();
    for (const auto& d : r.dropped_emotions)
      dropped_e.push_back(ojson{{"label", d.label}, {"reason", to_string(d.reason)}});
    ojson dropped_t = ojson::array();
    for (const auto& d : r.dropped_triggers)
      dropped_t.push_back(ojson{{"emotion", d.emotion}, {"text", d.text}, {"reason", to_string(d.reason)}});
    doc["dropped_emotions"] = std::move(dropped_e);
    doc["dropped_triggers"] = std::move(dropped_t);
    if (!r.error.empty()) doc["error"] = r.error;
    out += detail::dump_line(doc);
    out += '\n';
  }
  return out;
}

}  // namespace eot
