#pragma once

// Score reports: a headline row in P, R, F1, EM, PM, R1, RL order, the
// per-emotion breakdown, parse statistics and the confusion matrix.

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>

#include "eot/agreement.hpp"
#include "eot/extraction.hpp"
#include "eot/metrics.hpp"

namespace eot {

struct ParseStats {
  std::size_t reviews = 0;
  std::size_t clean = 0;
  std::size_t repaired = 0;
  std::size_t unparseable = 0;
  std::size_t failed_requests = 0;  // Failed ledger entries, scored as empty
  std::size_t missing_entries = 0;  // no ledger entry, scored as empty
  std::array<std::size_t, 6> dropped_triggers{};  // by DropReason
  std::array<std::size_t, 6> dropped_emotions{};

  void add(const ParseReport& report);
};

struct ScoreReport {
  std::string run_id;
  std::string model_id;
  std::string strategy;
  std::string prompt_version;
  Scores scores;
  ConfusionMatrix confusion;
  ParseStats parse;
};

std::string format_score_report(const ScoreReport& report, TableFormat format);
/// Contents of runs/<run_id>/score.json.
std::string score_report_json(const ScoreReport& report);

/// Headline values of one scored run.
struct ScoreRow {
  std::string run_id;
  std::string model_id;
  std::string strategy;
  std::array<double, 7> values{};  // P, R, F1, EM, PM, R1, RL
};

inline constexpr std::array<std::string_view, 7> kScoreColumns{"P", "R", "F1", "EM", "PM", "R1", "RL"};

ScoreRow score_row(const ScoreReport& report);
/// Reads the headline of a score.json; throws Error(kMalformedRecord).
ScoreRow parse_score_row(std::string_view score_json);
/// One row per run, grouped by model in first-appearance order.
std::string format_comparison(std::span<const ScoreRow> rows, TableFormat format);

}  // namespace eot
