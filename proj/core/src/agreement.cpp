#include "eot/agreement.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "eot/error.hpp"
#include "eot/text.hpp"
#include "table.hpp"

namespace eot {

namespace {

const std::vector<TriggerSpan>* triggers_for(const EotOutput& output, Emotion e) {
  const auto* pair = output.find(e);
  return pair == nullptr ? nullptr : &pair->triggers;
}

bool covers(const std::vector<TriggerSpan>* spans, const Token& token) {
  if (spans == nullptr) return false;
  return std::any_of(spans->begin(), spans->end(), [&](const TriggerSpan& s) {
    return s.start() < token.end && token.start < s.end();
  });
}

EmotionSet non_neutral(EmotionSet set) {
  set.reset(index_of(Emotion::kNeutral));
  return set;
}

std::optional<double> mean_of(const std::vector<std::optional<double>>& values) {
  double sum = 0;
  std::size_t n = 0;
  for (const auto& v : values) {
    if (v) {
      sum += *v;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

using ByAnnotator = std::map<std::string, const EotOutput*>;

}  // namespace

void BinaryCounts::add(bool a, bool b) noexcept {
  if (a && b) {
    ++both_yes;
  } else if (a) {
    ++a_only;
  } else if (b) {
    ++b_only;
  } else {
    ++both_no;
  }
}

BinaryCounts& BinaryCounts::operator+=(const BinaryCounts& other) noexcept {
  both_yes += other.both_yes;
  a_only += other.a_only;
  b_only += other.b_only;
  both_no += other.both_no;
  return *this;
}

double cohen_kappa(const BinaryCounts& counts) {
  const std::size_t n = counts.total();
  if (n == 0) return 1.0;
  const std::size_t a_yes = counts.both_yes + counts.a_only;
  const std::size_t b_yes = counts.both_yes + counts.b_only;
  const std::size_t agree = counts.both_yes + counts.both_no;
  const bool chance_certain = (a_yes == 0 && b_yes == 0) || (a_yes == n && b_yes == n);
  if (chance_certain) {
    if (agree == n) return 1.0;
    throw Error(ErrorCode::kDegenerateDistribution, "chance agreement is 1 but raters disagree");
  }
  const double dn = static_cast<double>(n);
  const double po = static_cast<double>(agree) / dn;
  const double pa = static_cast<double>(a_yes) / dn;
  const double pb = static_cast<double>(b_yes) / dn;
  const double pe = pa * pb + (1.0 - pa) * (1.0 - pb);
  return (po - pe) / (1.0 - pe);
}

double cohen_kappa(std::span<const EmotionSet> labels_a, std::span<const EmotionSet> labels_b) {
  if (labels_a.size() != labels_b.size() || labels_a.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "cohen_kappa needs two equal, non-empty label lists");
  }
  BinaryCounts counts;
  for (std::size_t i = 0; i < labels_a.size(); ++i) {
    for (std::size_t e = 0; e < kEmotionCount; ++e) counts.add(labels_a[i].test(e), labels_b[i].test(e));
  }
  return cohen_kappa(counts);
}

double fleiss_kappa(const std::vector<std::vector<std::size_t>>& item_category_counts) {
  if (item_category_counts.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "fleiss_kappa needs at least one item");
  }
  const std::size_t categories = item_category_counts.front().size();
  const std::size_t raters = std::accumulate(item_category_counts.front().begin(),
                                             item_category_counts.front().end(), std::size_t{0});
  if (raters < 2 || categories == 0) {
    throw Error(ErrorCode::kInvalidArgument, "fleiss_kappa needs at least two raters");
  }
  std::vector<std::size_t> column(categories, 0);
  double p_bar = 0;
  for (const auto& row : item_category_counts) {
    if (row.size() != categories ||
        std::accumulate(row.begin(), row.end(), std::size_t{0}) != raters) {
      throw Error(ErrorCode::kInvalidArgument, "every item must be rated by the same raters");
    }
    std::size_t sq = 0;
    for (std::size_t j = 0; j < categories; ++j) {
      sq += row[j] * row[j];
      column[j] += row[j];
    }
    p_bar += static_cast<double>(sq - raters) / static_cast<double>(raters * (raters - 1));
  }
  const std::size_t items = item_category_counts.size();
  p_bar /= static_cast<double>(items);
  const std::size_t ratings = items * raters;
  if (std::find(column.begin(), column.end(), ratings) != column.end()) {
    // Every rating fell in one category, so every item is unanimous.
    return 1.0;
  }
  double p_e = 0;
  for (auto c : column) {
    const double p = static_cast<double>(c) / static_cast<double>(ratings);
    p_e += p * p;
  }
  return (p_bar - p_e) / (1.0 - p_e);
}

BinaryCounts trigger_token_counts(const EotOutput& a, const EotOutput& b, const Review& review) {
  BinaryCounts counts;
  const auto tokens = tokenize_with_offsets(review.text);
  const EmotionSet emotions = non_neutral(a.emotion_set() | b.emotion_set());
  for (Emotion e : kAllEmotions) {
    if (!emotions.test(index_of(e))) continue;
    const auto* ta = triggers_for(a, e);
    const auto* tb = triggers_for(b, e);
    for (const auto& token : tokens) counts.add(covers(ta, token), covers(tb, token));
  }
  return counts;
}

double trigger_token_kappa(std::span<const AnnotationRecord> annotator_a,
                           std::span<const AnnotationRecord> annotator_b,
                           const ReviewIndex& reviews) {
  std::map<std::string, const EotOutput*, std::less<>> b_by_review;
  for (const auto& r : annotator_b) b_by_review.emplace(r.review_id, &r.output);
  BinaryCounts counts;
  for (const auto& r : annotator_a) {
    const auto other = b_by_review.find(r.review_id);
    if (other == b_by_review.end()) continue;
    const auto review = reviews.find(r.review_id);
    if (review == reviews.end()) {
      throw Error(ErrorCode::kInvalidArgument, "unknown review " + r.review_id);
    }
    counts += trigger_token_counts(r.output, *other->second, review->second);
  }
  return cohen_kappa(counts);
}

AgreementReport compute_agreement(std::span<const AnnotationRecord> records,
                                  const ReviewIndex& reviews) {
  AgreementReport report;
  std::set<std::string> ids;
  for (const auto& r : records) ids.insert(r.annotator_id);
  report.annotators.assign(ids.begin(), ids.end());
  const std::size_t n = report.annotators.size();
  if (n == 3) {
    report.pairs = {{0, 1}, {1, 2}, {0, 2}};
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) report.pairs.emplace_back(i, j);
    }
  }

  // domain -> review -> annotator -> output
  std::array<std::map<std::string, ByAnnotator>, kDomainCount> by_domain;
  for (const auto& r : records) {
    const auto review = reviews.find(r.review_id);
    if (review == reviews.end()) {
      throw Error(ErrorCode::kInvalidArgument, "unknown review " + r.review_id);
    }
    by_domain[index_of(review->second.domain)][r.review_id][r.annotator_id] = &r.output;
  }

  std::vector<AgreementRow> emotion_rows;
  std::vector<AgreementRow> trigger_rows;
  for (Domain d : kAllDomains) {
    const auto& domain_reviews = by_domain[index_of(d)];
    AgreementRow emo{std::string(to_string(d)), {}, {}, {}};
    AgreementRow trig{std::string(to_string(d)), {}, {}, {}};
    for (const auto& [i, j] : report.pairs) {
      const auto& a_id = report.annotators[i];
      const auto& b_id = report.annotators[j];
      BinaryCounts emo_counts;
      BinaryCounts trig_counts;
      bool shared = false;
      for (const auto& [review_id, outputs] : domain_reviews) {
        const auto a = outputs.find(a_id);
        const auto b = outputs.find(b_id);
        if (a == outputs.end() || b == outputs.end()) continue;
        shared = true;
        const EmotionSet sa = a->second->emotion_set();
        const EmotionSet sb = b->second->emotion_set();
        for (std::size_t e = 0; e < kEmotionCount; ++e) emo_counts.add(sa.test(e), sb.test(e));
        trig_counts += trigger_token_counts(*a->second, *b->second, reviews.find(review_id)->second);
      }
      emo.pairs.push_back(shared ? std::optional(cohen_kappa(emo_counts)) : std::nullopt);
      trig.pairs.push_back(shared ? std::optional(cohen_kappa(trig_counts)) : std::nullopt);
    }
    emo.average = mean_of(emo.pairs);
    trig.average = mean_of(trig.pairs);

    if (n >= 2) {
      std::vector<std::vector<std::size_t>> emo_items;
      std::vector<std::vector<std::size_t>> trig_items;
      for (const auto& [review_id, outputs] : domain_reviews) {
        if (outputs.size() != n) continue;
        EmotionSet any;
        for (const auto& [id, out] : outputs) any |= out->emotion_set();
        for (Emotion e : kAllEmotions) {
          std::size_t yes = 0;
          for (const auto& [id, out] : outputs) yes += out->has(e) ? 1 : 0;
          emo_items.push_back({yes, n - yes});
        }
        const auto tokens = tokenize_with_offsets(reviews.find(review_id)->second.text);
        any = non_neutral(any);
        for (Emotion e : kAllEmotions) {
          if (!any.test(index_of(e))) continue;
          for (const auto& token : tokens) {
            std::size_t yes = 0;
            for (const auto& [id, out] : outputs) yes += covers(triggers_for(*out, e), token) ? 1 : 0;
            trig_items.push_back({yes, n - yes});
          }
        }
      }
      if (!emo_items.empty()) emo.fleiss = fleiss_kappa(emo_items);
      if (!trig_items.empty()) {
        trig.fleiss = fleiss_kappa(trig_items);
      } else if (!emo_items.empty()) {
        trig.fleiss = 1.0;
      }
    }
    emotion_rows.push_back(std::move(emo));
    trigger_rows.push_back(std::move(trig));
  }

  auto overall = [&](const std::vector<AgreementRow>& rows) {
    AgreementRow out{"Overall Average", {}, {}, {}};
    for (std::size_t p = 0; p < report.pairs.size(); ++p) {
      std::vector<std::optional<double>> column;
      for (const auto& row : rows) column.push_back(row.pairs[p]);
      out.pairs.push_back(mean_of(column));
    }
    std::vector<std::optional<double>> averages;
    std::vector<std::optional<double>> fleiss;
    for (const auto& row : rows) {
      averages.push_back(row.average);
      fleiss.push_back(row.fleiss);
    }
    out.average = mean_of(averages);
    out.fleiss = mean_of(fleiss);
    return out;
  };
  if (!emotion_rows.empty()) {
    auto emo_overall = overall(emotion_rows);
    auto trig_overall = overall(trigger_rows);
    emotion_rows.push_back(std::move(emo_overall));
    trigger_rows.push_back(std::move(trig_overall));
  }
  report.emotion_rows = std::move(emotion_rows);
  report.trigger_rows = std::move(trigger_rows);
  return report;
}

std::string format_agreement(const AgreementReport& report, TableFormat format) {
  std::vector<std::string> pair_names;
  for (const auto& [i, j] : report.pairs) {
    pair_names.push_back(report.annotators[i] + "/" + report.annotators[j]);
  }
  auto cell = [&](const std::optional<double>& v, int decimals) {
    return v ? detail::fixed(*v, decimals) : std::string("-");
  };

  if (format == TableFormat::kCsv) {
    std::vector<std::string> header{"section", "domain"};
    header.insert(header.end(), pair_names.begin(), pair_names.end());
    header.push_back("average");
    header.push_back("fleiss");
    std::string out = detail::csv_line(header);
    auto emit = [&](std::string_view section, const std::vector<AgreementRow>& rows) {
      for (const auto& row : rows) {
        std::vector<std::string> fields{std::string(section), row.label};
        for (const auto& v : row.pairs) fields.push_back(v ? detail::fixed(*v, 6) : "");
        fields.push_back(row.average ? detail::fixed(*row.average, 6) : "");
        fields.push_back(row.fleiss ? detail::fixed(*row.fleiss, 6) : "");
        out += detail::csv_line(fields);
      }
    };
    emit("emotion", report.emotion_rows);
    emit("trigger", report.trigger_rows);
    return out;
  }

  std::vector<std::string> header{"Domain"};
  header.insert(header.end(), pair_names.begin(), pair_names.end());
  header.push_back("Average");
  header.push_back("Fleiss");
  detail::TextTable table(header);
  auto emit = [&](const std::string& caption, const std::vector<AgreementRow>& rows) {
    table.add_section(caption);
    for (const auto& row : rows) {
      std::vector<std::string> cells{row.label};
      for (const auto& v : row.pairs) cells.push_back(cell(v, 2));
      cells.push_back(cell(row.average, 2));
      cells.push_back(cell(row.fleiss, 2));
      table.add_row(std::move(cells));
    }
  };
  emit("Emotion Agreement", report.emotion_rows);
  emit("Trigger Agreement", report.trigger_rows);
  return table.render() +
         "Emotion agreement: kappa over per-(review, emotion) binary items, nine labels.\n"
         "Trigger agreement: token-level kappa, items pooled across the emotions either "
         "annotator assigned.\n";
}

}  // namespace eot
