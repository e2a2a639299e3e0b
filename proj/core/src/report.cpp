#include "eot/report.hpp"

#include <algorithm>
#include <vector>

#include "eot/error.hpp"
#include "json_records.hpp"
#include "table.hpp"

namespace eot {

using detail::json;
using detail::ojson;

namespace {

constexpr std::array<DropReason, 6> kReasons{DropReason::kOov,           DropReason::kMalformed,
                                             DropReason::kNotExtractive, DropReason::kNoVerifiableTrigger,
                                             DropReason::kNeutralConflict, DropReason::kNeutralTrigger};

constexpr int kTableDecimals = 2;
constexpr int kCsvDecimals = 9;

constexpr std::string_view kFootnote =
    "P/R/F1: micro-averaged over (review, emotion) pairs, Neutral included.\n"
    "EM: normalized text equal to a same-emotion gold trigger. PM: shares a token but is not EM.\n"
    "R1/RL: greedy ROUGE-L alignment per (review, emotion), averaged over gold triggers;\n"
    "unaligned gold triggers score 0 and empty vs empty scores 1.\n"
    "Unparseable responses and failed requests are scored as empty predictions.\n";

std::string num(double v, TableFormat format) {
  return detail::fixed(v, format == TableFormat::kCsv ? kCsvDecimals : kTableDecimals);
}

std::string render(const detail::TextTable& table) { return table.render(); }

}  // namespace

void ParseStats::add(const ParseReport& report) {
  ++reviews;
  switch (report.parse_status) {
    case ParseStatus::kClean: ++clean; break;
    case ParseStatus::kRepaired: ++repaired; break;
    case ParseStatus::kUnparseable: ++unparseable; break;
  }
  for (const auto& d : report.dropped_triggers) ++dropped_triggers[static_cast<std::size_t>(d.reason)];
  for (const auto& d : report.dropped_emotions) ++dropped_emotions[static_cast<std::size_t>(d.reason)];
}

ScoreRow score_row(const ScoreReport& r) {
  const auto& e = r.scores.emotion;
  const auto& t = r.scores.trigger;
  return {r.run_id, r.model_id, r.strategy,
          {e.precision, e.recall, e.f1, t.exact_match, t.partial_match, t.rouge1, t.rougeL}};
}

std::string format_score_report(const ScoreReport& r, TableFormat format) {
  const ScoreRow row = score_row(r);
  const auto& e = r.scores.emotion;
  const auto& c = r.scores.trigger.counts;
  const auto& p = r.parse;

  std::vector<std::string> headline_header{"Model", "Strategy"};
  for (auto col : kScoreColumns) headline_header.emplace_back(col);
  std::vector<std::string> headline{r.model_id, r.strategy};
  for (double v : row.values) headline.push_back(num(v, format));

  std::vector<std::string> emotion_header{"Emotion", "P", "R", "F1", "Support", "Predicted"};
  std::vector<std::vector<std::string>> emotion_rows;
  for (Emotion em : kAllEmotions) {
    const auto& l = e.per_emotion[index_of(em)];
    emotion_rows.push_back({std::string(to_string(em)), num(l.prf.precision, format), num(l.prf.recall, format),
                            num(l.prf.f1, format), std::to_string(l.support), std::to_string(l.predicted)});
  }
  emotion_rows.push_back({"Macro", num(e.macro.precision, format), num(e.macro.recall, format),
                          num(e.macro.f1, format), std::to_string(e.n_gold), std::to_string(e.n_pred)});

  std::vector<std::string> cm_header{"Predicted \\ Gold"};
  for (Emotion em : kAllEmotions) cm_header.emplace_back(to_string(em));
  cm_header.emplace_back("(none)");
  std::vector<std::vector<std::string>> cm_rows;
  const int cm_decimals = format == TableFormat::kCsv ? kCsvDecimals : kTableDecimals;
  for (Emotion pe : kAllEmotions) {
    std::vector<std::string> cells{std::string(to_string(pe))};
    for (Emotion ge : kAllEmotions) cells.push_back(detail::fixed(r.confusion.at(pe, ge), cm_decimals));
    cells.push_back(detail::fixed(r.confusion.unpaired_predicted[index_of(pe)], cm_decimals));
    cm_rows.push_back(std::move(cells));
  }
  {
    std::vector<std::string> cells{"(none)"};
    for (Emotion ge : kAllEmotions) cells.push_back(detail::fixed(r.confusion.unpaired_gold[index_of(ge)], cm_decimals));
    cells.emplace_back("");
    cm_rows.push_back(std::move(cells));
  }

  std::vector<std::pair<std::string, std::string>> stats{
      {"reviews", std::to_string(p.reviews)},
      {"clean", std::to_string(p.clean)},
      {"repaired", std::to_string(p.repaired)},
      {"unparseable", std::to_string(p.unparseable)},
      {"failed_requests", std::to_string(p.failed_requests)},
      {"missing_entries", std::to_string(p.missing_entries)},
      {"predicted_triggers", std::to_string(c.n_pred)},
      {"gold_triggers", std::to_string(c.n_gold)},
      {"em_triggers", std::to_string(c.n_em)},
      {"pm_triggers", std::to_string(c.n_pm)},
      {"nomatch_triggers", std::to_string(c.n_nomatch)},
  };
  for (auto reason : kReasons) {
    const auto i = static_cast<std::size_t>(reason);
    stats.emplace_back("dropped_triggers_" + std::string(to_string(reason)), std::to_string(p.dropped_triggers[i]));
    stats.emplace_back("dropped_emotions_" + std::string(to_string(reason)), std::to_string(p.dropped_emotions[i]));
  }

  std::string out;
  if (format == TableFormat::kCsv) {
    out += detail::csv_line(headline_header) + detail::csv_line(headline) + "\n";
    out += detail::csv_line(emotion_header);
    for (const auto& row_cells : emotion_rows) out += detail::csv_line(row_cells);
    out += "\n" + detail::csv_line({"statistic", "value"});
    for (const auto& [k, v] : stats) out += detail::csv_line({k, v});
    out += "\n" + detail::csv_line(cm_header);
    for (const auto& row_cells : cm_rows) out += detail::csv_line(row_cells);
    return out;
  }

  out += "Run " + r.run_id + " (prompts " + r.prompt_version + ")\n\n";
  detail::TextTable headline_table(headline_header);
  headline_table.add_row(headline);
  out += render(headline_table) + "\n";

  detail::TextTable emotion_table(emotion_header);
  for (auto& row_cells : emotion_rows) emotion_table.add_row(std::move(row_cells));
  out += render(emotion_table) + "\n";

  detail::TextTable stats_table({"Parse statistic", "Value"});
  for (const auto& [k, v] : stats) {
    // Zero drop counters are noise in the text view; CSV keeps them all.
    if (k.rfind("dropped_", 0) == 0 && v == "0") continue;
    stats_table.add_row({k, v});
  }
  out += render(stats_table) + "\n";

  detail::TextTable cm_table(cm_header);
  for (auto& row_cells : cm_rows) cm_table.add_row(std::move(row_cells));
  out += "Confusion matrix (rows predicted, columns gold)\n" + render(cm_table) + "\n";
  out += kFootnote;
  return out;
}

std::string score_report_json(const ScoreReport& r) {
  const ScoreRow row = score_row(r);
  const auto& e = r.scores.emotion;
  const auto& c = r.scores.trigger.counts;
  ojson doc;
  doc["format_version"] = detail::kFormatVersion;
  doc["kind"] = "score_report";
  doc["run_id"] = r.run_id;
  doc["model_id"] = r.model_id;
  doc["strategy"] = r.strategy;
  doc["prompt_version"] = r.prompt_version;
  ojson metrics;
  for (std::size_t i = 0; i < kScoreColumns.size(); ++i) metrics[std::string(kScoreColumns[i])] = row.values[i];
  doc["metrics"] = std::move(metrics);

  ojson per;
  for (Emotion em : kAllEmotions) {
    const auto& l = e.per_emotion[index_of(em)];
    per[std::string(to_string(em))] = ojson{{"precision", l.prf.precision}, {"recall", l.prf.recall},
                                            {"f1", l.prf.f1},           {"support", l.support},
                                            {"predicted", l.predicted}, {"hits", l.hits}};
  }
  doc["emotion"] = ojson{{"hits", e.hits},
                         {"n_pred", e.n_pred},
                         {"n_gold", e.n_gold},
                         {"macro", ojson{{"precision", e.macro.precision}, {"recall", e.macro.recall}, {"f1", e.macro.f1}}},
                         {"per_emotion", std::move(per)}};
  doc["trigger"] = ojson{{"n_pred", c.n_pred}, {"n_gold", c.n_gold}, {"n_em", c.n_em},
                         {"n_pm", c.n_pm},     {"n_nomatch", c.n_nomatch}};

  const auto& p = r.parse;
  ojson dropped_t, dropped_e;
  for (auto reason : kReasons) {
    const auto i = static_cast<std::size_t>(reason);
    dropped_t[std::string(to_string(reason))] = p.dropped_triggers[i];
    dropped_e[std::string(to_string(reason))] = p.dropped_emotions[i];
  }
  doc["parse"] = ojson{{"reviews", p.reviews},
                       {"clean", p.clean},
                       {"repaired", p.repaired},
                       {"unparseable", p.unparseable},
                       {"failed_requests", p.failed_requests},
                       {"missing_entries", p.missing_entries},
                       {"dropped_triggers", std::move(dropped_t)},
                       {"dropped_emotions", std::move(dropped_e)}};

  ojson labels = ojson::array();
  for (Emotion em : kAllEmotions) labels.push_back(to_string(em));
  ojson cells = ojson::array();
  for (const auto& cm_row : r.confusion.cells) cells.push_back(cm_row);
  doc["confusion"] = ojson{{"labels", std::move(labels)},
                           {"cells", std::move(cells)},
                           {"unpaired_predicted", r.confusion.unpaired_predicted},
                           {"unpaired_gold", r.confusion.unpaired_gold}};
  return doc.dump(2) + "\n";
}

ScoreRow parse_score_row(std::string_view text) {
  constexpr std::string_view what = "score report";
  const json doc = detail::parse_json(text, what);
  if (!doc.is_object()) throw Error(ErrorCode::kMalformedRecord, "score report is not an object");
  ScoreRow row;
  row.run_id = detail::require_string(doc, "run_id", what);
  row.model_id = detail::require_string(doc, "model_id", what);
  row.strategy = detail::require_string(doc, "strategy", what);
  const json& metrics = detail::require(doc, "metrics", what);
  for (std::size_t i = 0; i < kScoreColumns.size(); ++i) {
    const json& v = detail::require(metrics, kScoreColumns[i], what);
    if (!v.is_number())
      throw Error(ErrorCode::kMalformedRecord, "score report: metric " + std::string(kScoreColumns[i]) + " is not a number");
    row.values[i] = v.get<double>();
  }
  return row;
}

std::string format_comparison(std::span<const ScoreRow> rows, TableFormat format) {
  std::vector<std::string> models;
  for (const auto& r : rows)
    if (std::find(models.begin(), models.end(), r.model_id) == models.end()) models.push_back(r.model_id);

  std::vector<std::string> header{"Models", "Strategy"};
  for (auto col : kScoreColumns) header.emplace_back(col);

  std::string out;
  detail::TextTable table(header);
  if (format == TableFormat::kCsv) out += detail::csv_line(header);
  for (const auto& model : models) {
    if (format == TableFormat::kTable) table.add_section(model);
    for (const auto& r : rows) {
      if (r.model_id != model) continue;
      std::vector<std::string> cells{r.model_id, r.strategy};
      for (double v : r.values) cells.push_back(num(v, format));
      if (format == TableFormat::kCsv) out += detail::csv_line(cells);
      else table.add_row(std::move(cells));
    }
  }
  if (format == TableFormat::kTable) out += table.render() + "\n" + std::string(kFootnote);
  return out;
}

}  // namespace eot
