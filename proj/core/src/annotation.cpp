#include "eot/annotation.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "eot/error.hpp"
#include "eot/text.hpp"
#include "json_records.hpp"
#include "kv.hpp"

namespace eot {

namespace {

struct Candidate {
  TriggerSpan span;
  std::set<std::string> annotators;
};

// Strict total order over distinct spans: longer first, then leftmost, then
// lexicographically smallest text.
bool retention_order(const Candidate& a, const Candidate& b) {
  if (a.span.length() != b.span.length()) return a.span.length() > b.span.length();
  if (a.span.start() != b.span.start()) return a.span.start() < b.span.start();
  return a.span.text() < b.span.text();
}

bool leftmost_first(const TriggerSpan& a, const TriggerSpan& b) {
  if (a.start() != b.start()) return a.start() < b.start();
  return a.text() < b.text();
}

std::vector<Candidate> resolve_triggers(std::span<const AnnotationRecord> annotations,
                                        Emotion emotion) {
  // Dedup on normalized text, keeping the leftmost span per key.
  std::map<std::string, Candidate> by_key;
  for (const auto& record : annotations) {
    const auto* pair = record.output.find(emotion);
    if (pair == nullptr) continue;
    for (const auto& span : pair->triggers) {
      const auto key = normalize_text(span.text());
      auto it = by_key.find(key);
      if (it == by_key.end()) {
        by_key.emplace(key, Candidate{span, {record.annotator_id}});
        continue;
      }
      auto& kept = it->second;
      kept.annotators.insert(record.annotator_id);
      if (leftmost_first(span, kept.span)) kept.span = span;
    }
  }
  std::vector<Candidate> candidates;
  for (auto& [key, c] : by_key) candidates.push_back(std::move(c));
  std::sort(candidates.begin(), candidates.end(), retention_order);

  std::vector<Candidate> retained;
  for (auto& c : candidates) {
    auto absorber = std::find_if(retained.begin(), retained.end(), [&](const Candidate& r) {
      return r.span.overlaps(c.span);
    });
    if (absorber == retained.end()) {
      retained.push_back(std::move(c));
    } else {
      absorber->annotators.insert(c.annotators.begin(), c.annotators.end());
    }
  }
  std::sort(retained.begin(), retained.end(), [](const Candidate& a, const Candidate& b) {
    return a.span.start() < b.span.start();
  });
  return retained;
}

}  // namespace

GoldRecord aggregate_gold(std::span<const AnnotationRecord> annotations) {
  if (annotations.size() != 3) {
    throw Error(ErrorCode::kWrongAnnotatorCount,
                "expected 3 annotations, got " + std::to_string(annotations.size()) +
                    (annotations.empty() ? "" : " for review " + annotations.front().review_id));
  }
  const std::string& review_id = annotations.front().review_id;
  for (const auto& a : annotations) {
    if (a.review_id != review_id || a.output.review_id != review_id) {
      throw Error(ErrorCode::kMismatchedReviewIds,
                  "annotations mix reviews " + review_id + " and " + a.review_id);
    }
  }

  GoldRecord gold;
  gold.review_id = review_id;
  gold.output.review_id = review_id;
  for (const auto& a : annotations) {
    const EmotionSet set = a.output.emotion_set();
    for (Emotion e : kAllEmotions) {
      if (set.test(index_of(e))) ++gold.provenance.votes[index_of(e)];
    }
  }

  for (Emotion e : kAllEmotions) {
    if (e == Emotion::kNeutral || gold.provenance.votes[index_of(e)] < 2) continue;
    EmotionTriggers pair{e, {}};
    for (auto& c : resolve_triggers(annotations, e)) {
      pair.triggers.push_back(c.span);
      gold.provenance.triggers.push_back(TriggerProvenance{
          e, std::move(c.span), std::vector<std::string>(c.annotators.begin(), c.annotators.end())});
    }
    gold.output.pairs.push_back(std::move(pair));
  }

  if (gold.output.pairs.empty()) {
    gold.output.pairs.push_back(EmotionTriggers{Emotion::kNeutral, {}});
    gold.provenance.no_majority = gold.provenance.votes[index_of(Emotion::kNeutral)] < 2;
  }
  return gold;
}

AnnotationFile parse_annotations(std::span<const std::string> lines, const ReviewIndex& reviews) {
  AnnotationFile file;
  std::set<std::pair<std::string, std::string>> seen;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    if (detail::trim(lines[i]).empty()) continue;
    try {
      const auto value = detail::parse_json(lines[i], "annotation");
      AnnotationRecord record;
      record.review_id = detail::require_string(value, "review_id", "annotation");
      record.annotator_id = detail::require_string(value, "annotator_id", "annotation");
      if (record.annotator_id.empty()) {
        throw Error(ErrorCode::kMalformedRecord, "annotation: empty annotator_id");
      }
      const auto review = reviews.find(record.review_id);
      if (review == reviews.end()) {
        throw Error(ErrorCode::kMalformedRecord, "unknown review " + record.review_id);
      }
      if (!seen.emplace(record.review_id, record.annotator_id).second) {
        throw Error(ErrorCode::kMalformedRecord, "duplicate annotation of " + record.review_id +
                                                     " by " + record.annotator_id);
      }
      record.output = detail::output_from_json(value, review->second);
      file.records.push_back(std::move(record));
    } catch (const Error& e) {
      file.rejections.push_back({line_no, e.what()});
    }
  }
  return file;
}

AnnotationFile load_annotations(const std::filesystem::path& path, const ReviewIndex& reviews) {
  const auto lines = detail::read_lines(path);
  return parse_annotations(lines, reviews);
}

std::vector<GoldRecord> aggregate_all(std::span<const AnnotationRecord> records) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<AnnotationRecord>, std::less<>> groups;
  for (const auto& r : records) {
    auto [it, inserted] = groups.try_emplace(r.review_id);
    if (inserted) order.push_back(r.review_id);
    it->second.push_back(r);
  }
  std::vector<GoldRecord> gold;
  gold.reserve(order.size());
  for (const auto& id : order) gold.push_back(aggregate_gold(groups.at(id)));
  return gold;
}

std::string format_gold(std::span<const GoldRecord> gold) {
  std::string out;
  for (const auto& g : gold) {
    detail::ojson line;
    line["format_version"] = detail::kFormatVersion;
    line["review_id"] = g.review_id;
    line["emotions"] = detail::emotions_to_json(g.output);
    detail::ojson votes = detail::ojson::object();
    for (Emotion e : kAllEmotions) {
      if (g.provenance.votes[index_of(e)] > 0) {
        votes[std::string(to_string(e))] = g.provenance.votes[index_of(e)];
      }
    }
    detail::ojson triggers = detail::ojson::array();
    for (const auto& t : g.provenance.triggers) {
      detail::ojson entry;
      entry["emotion"] = std::string(to_string(t.emotion));
      entry["text"] = t.span.text();
      entry["start"] = t.span.start();
      entry["end"] = t.span.end();
      entry["annotators"] = t.annotators;
      triggers.push_back(std::move(entry));
    }
    detail::ojson provenance;
    provenance["votes"] = std::move(votes);
    provenance["no_majority"] = g.provenance.no_majority;
    provenance["triggers"] = std::move(triggers);
    line["provenance"] = std::move(provenance);
    out += detail::dump_line(line);
    out += '\n';
  }
  return out;
}

void write_gold(const std::filesystem::path& path, std::span<const GoldRecord> gold) {
  detail::write_file(path, format_gold(gold));
}

std::vector<GoldRecord> parse_gold(std::span<const std::string> lines, const ReviewIndex& reviews,
                                   bool skip_unknown) {
  std::vector<GoldRecord> gold;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (detail::trim(lines[i]).empty()) continue;
    const std::string where = "gold line " + std::to_string(i + 1);
    try {
      auto value = detail::parse_json(lines[i], where);
      GoldRecord record;
      record.review_id = detail::require_string(value, "review_id", where);
      if (!seen.insert(record.review_id).second) {
        throw Error(ErrorCode::kMalformedRecord, "duplicate gold for " + record.review_id);
      }
      const auto review = reviews.find(record.review_id);
      if (review == reviews.end()) {
        if (skip_unknown) continue;
        throw Error(ErrorCode::kMalformedRecord, "unknown review " + record.review_id);
      }
      const detail::json* prov_triggers = nullptr;
      if (auto p = value.find("provenance"); p != value.end() && p->is_object()) {
        if (auto v = p->find("votes"); v != p->end() && v->is_object()) {
          for (const auto& [name, count] : v->items()) {
            const auto e = try_canonical_emotion(name);
            if (e && count.is_number_integer()) record.provenance.votes[index_of(*e)] = count.get<int>();
          }
        }
        if (auto nm = p->find("no_majority"); nm != p->end() && nm->is_boolean()) {
          record.provenance.no_majority = nm->get<bool>();
        }
        if (auto t = p->find("triggers"); t != p->end() && t->is_array()) prov_triggers = &*t;
      }
      // Swap plain trigger strings for their recorded offsets.
      if (prov_triggers != nullptr && value.contains("emotions") && value["emotions"].is_array()) {
        std::vector<bool> used(prov_triggers->size(), false);
        for (auto& entry : value["emotions"]) {
          if (!entry.is_object() || !entry.contains("triggers") || !entry["triggers"].is_array()) continue;
          const auto emotion = entry.value("emotion", std::string());
          for (auto& trig : entry["triggers"]) {
            if (!trig.is_string()) continue;
            for (std::size_t k = 0; k < prov_triggers->size(); ++k) {
              const auto& p = (*prov_triggers)[k];
              if (used[k] || !p.is_object() || p.value("emotion", std::string()) != emotion ||
                  p.value("text", std::string()) != trig.get<std::string>() ||
                  !p.contains("start") || !p.contains("end")) {
                continue;
              }
              used[k] = true;
              trig = detail::json{{"text", p["text"]}, {"start", p["start"]}, {"end", p["end"]}};
              break;
            }
          }
        }
      }
      record.output = detail::output_from_json(value, review->second);
      for (const auto& pair : record.output.pairs) {
        for (const auto& span : pair.triggers) {
          record.provenance.triggers.push_back(TriggerProvenance{pair.emotion, span, {}});
        }
      }
      if (prov_triggers != nullptr) {
        for (auto& tp : record.provenance.triggers) {
          for (const auto& p : *prov_triggers) {
            if (p.is_object() && p.value("emotion", std::string()) == to_string(tp.emotion) &&
                p.value("text", std::string()) == tp.span.text() && p.contains("annotators") &&
                p["annotators"].is_array()) {
              for (const auto& a : p["annotators"]) {
                if (a.is_string()) tp.annotators.push_back(a.get<std::string>());
              }
              break;
            }
          }
        }
      }
      gold.push_back(std::move(record));
    } catch (const Error& e) {
      throw Error(ErrorCode::kMalformedRecord, where + ": " + e.what());
    }
  }
  return gold;
}

std::vector<GoldRecord> load_gold(const std::filesystem::path& path, const ReviewIndex& reviews,
                                  bool skip_unknown) {
  const auto lines = detail::read_lines(path);
  return parse_gold(lines, reviews, skip_unknown);
}

}  // namespace eot
