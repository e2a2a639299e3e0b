#include <array>

#include "eot/agreement.hpp"
#include "eot/error.hpp"
#include "eot/text.hpp"
#include "table.hpp"

namespace eot {

namespace {

struct Accumulator {
  std::size_t reviews = 0;
  std::size_t emotions = 0;
  std::array<std::size_t, kEmotionCount> count{};
  std::array<std::size_t, kEmotionCount> triggers{};
  std::array<std::size_t, kEmotionCount> tokens{};

  void merge(const Accumulator& o) {
    reviews += o.reviews;
    emotions += o.emotions;
    for (std::size_t e = 0; e < kEmotionCount; ++e) {
      count[e] += o.count[e];
      triggers[e] += o.triggers[e];
      tokens[e] += o.tokens[e];
    }
  }
};

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

DomainStatistics finish(const Accumulator& acc) {
  DomainStatistics ds;
  ds.reviews = acc.reviews;
  ds.total_emotions = acc.emotions;
  ds.avg_emotions_per_review = ratio(acc.emotions, acc.reviews);
  for (std::size_t e = 0; e < kEmotionCount; ++e) {
    auto& es = ds.emotions[e];
    es.count = acc.count[e];
    es.percentage = 100.0 * ratio(acc.count[e], acc.emotions);
    es.total_triggers = acc.triggers[e];
    es.avg_triggers = ratio(acc.triggers[e], acc.count[e]);
    es.avg_trigger_tokens = ratio(acc.tokens[e], acc.triggers[e]);
  }
  return ds;
}

// Rows are listed alphabetically.
constexpr std::array<Emotion, kEmotionCount> kReportOrder{
    Emotion::kAnger, Emotion::kAnticipation, Emotion::kDisgust, Emotion::kFear, Emotion::kJoy,
    Emotion::kNeutral, Emotion::kSadness, Emotion::kSurprise, Emotion::kTrust};

}  // namespace

GoldStatistics gold_statistics(std::span<const GoldRecord> gold, const ReviewIndex& reviews) {
  std::array<Accumulator, kDomainCount> acc{};
  for (const auto& g : gold) {
    const auto review = reviews.find(g.review_id);
    if (review == reviews.end()) {
      throw Error(ErrorCode::kInvalidArgument, "gold references unknown review " + g.review_id);
    }
    auto& a = acc[index_of(review->second.domain)];
    ++a.reviews;
    for (const auto& pair : g.output.pairs) {
      const auto e = index_of(pair.emotion);
      ++a.emotions;
      ++a.count[e];
      a.triggers[e] += pair.triggers.size();
      for (const auto& t : pair.triggers) a.tokens[e] += tokenize(t.text()).size();
    }
  }
  GoldStatistics stats;
  Accumulator total;
  for (std::size_t d = 0; d < kDomainCount; ++d) {
    stats.domains[d] = finish(acc[d]);
    total.merge(acc[d]);
  }
  stats.overall = finish(total);
  return stats;
}

std::string format_gold_statistics(const GoldStatistics& stats, TableFormat format) {
  std::vector<const DomainStatistics*> columns;
  std::vector<std::string> names;
  for (Domain d : kAllDomains) {
    columns.push_back(&stats.domains[index_of(d)]);
    names.emplace_back(to_string(d));
  }
  columns.push_back(&stats.overall);
  names.emplace_back("Overall");

  if (format == TableFormat::kCsv) {
    std::vector<std::string> header{"section", "metric"};
    header.insert(header.end(), names.begin(), names.end());
    std::string out = detail::csv_line(header);
    auto row = [&](const std::string& section, const std::string& metric, auto value) {
      std::vector<std::string> fields{section, metric};
      for (const auto* c : columns) fields.push_back(value(*c));
      out += detail::csv_line(fields);
    };
    auto count = [](std::size_t v) { return std::to_string(v); };
    row("overall", "reviews", [&](const DomainStatistics& c) { return count(c.reviews); });
    row("overall", "total_emotions", [&](const DomainStatistics& c) { return count(c.total_emotions); });
    row("overall", "avg_emotions_per_review",
        [](const DomainStatistics& c) { return detail::fixed(c.avg_emotions_per_review, 9); });
    for (Emotion e : kReportOrder) {
      const std::string section(to_string(e));
      const auto i = index_of(e);
      row(section, "count", [&](const DomainStatistics& c) { return count(c.emotions[i].count); });
      row(section, "percentage",
          [&](const DomainStatistics& c) { return detail::fixed(c.emotions[i].percentage, 9); });
      row(section, "total_triggers",
          [&](const DomainStatistics& c) { return count(c.emotions[i].total_triggers); });
      row(section, "avg_triggers_per_emotion",
          [&](const DomainStatistics& c) { return detail::fixed(c.emotions[i].avg_triggers, 9); });
      row(section, "avg_trigger_length_tokens",
          [&](const DomainStatistics& c) { return detail::fixed(c.emotions[i].avg_trigger_tokens, 9); });
    }
    return out;
  }

  std::vector<std::string> header{"Metric"};
  header.insert(header.end(), names.begin(), names.end());
  detail::TextTable table(header);
  auto row = [&](const std::string& metric, auto value) {
    std::vector<std::string> cells{metric};
    for (const auto* c : columns) cells.push_back(value(*c));
    table.add_row(std::move(cells));
  };
  table.add_section("Overall Statistics");
  row("Total Emotions", [](const DomainStatistics& c) { return std::to_string(c.total_emotions); });
  row("Avg Emotions per Review",
      [](const DomainStatistics& c) { return detail::fixed(c.avg_emotions_per_review, 2); });
  for (Emotion e : kReportOrder) {
    const auto i = index_of(e);
    table.add_section("Emotion: " + std::string(to_string(e)));
    row("Count (Percentage)", [&](const DomainStatistics& c) {
      return std::to_string(c.emotions[i].count) + " (" + detail::fixed(c.emotions[i].percentage, 1) + "%)";
    });
    row("Total Triggers",
        [&](const DomainStatistics& c) { return std::to_string(c.emotions[i].total_triggers); });
    row("Avg Triggers per Emotion",
        [&](const DomainStatistics& c) { return detail::fixed(c.emotions[i].avg_triggers, 2); });
    row("Avg Trigger Length (words)",
        [&](const DomainStatistics& c) { return detail::fixed(c.emotions[i].avg_trigger_tokens, 2); });
  }
  return table.render();
}

}  // namespace eot
