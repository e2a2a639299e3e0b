#pragma once

// Inter-annotator agreement (Cohen / Fleiss kappa, token-level trigger
// agreement) and descriptive statistics of a gold standard.

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eot/annotation.hpp"
#include "eot/types.hpp"

namespace eot {

/// 2x2 contingency counts for two raters over binary items.
struct BinaryCounts {
  std::size_t both_yes = 0;
  std::size_t a_only = 0;
  std::size_t b_only = 0;
  std::size_t both_no = 0;

  std::size_t total() const noexcept { return both_yes + a_only + b_only + both_no; }
  void add(bool a, bool b) noexcept;
  BinaryCounts& operator+=(const BinaryCounts& other) noexcept;
};

/// Two-rater kappa. When chance agreement is 1 the result is 1 if observed
/// agreement is also 1, else Error(kDegenerateDistribution). An empty table
/// counts as vacuous perfect agreement.
double cohen_kappa(const BinaryCounts& counts);

/// Multi-label sets expanded to one binary item per (review, emotion) over
/// all nine labels.
double cohen_kappa(std::span<const EmotionSet> labels_a, std::span<const EmotionSet> labels_b);

/// Rows are items, columns categories; every row must sum to the same
/// rater count >= 2.
double fleiss_kappa(const std::vector<std::vector<std::size_t>>& item_category_counts);

/// Token coverage items for one review and two annotators: for every emotion
/// either annotator assigned (Neutral excluded), each review token is a
/// binary item "covered by one of this annotator's triggers for the emotion".
BinaryCounts trigger_token_counts(const EotOutput& a, const EotOutput& b, const Review& review);

/// Pooled token-level kappa over reviews annotated by both annotators.
double trigger_token_kappa(std::span<const AnnotationRecord> annotator_a,
                           std::span<const AnnotationRecord> annotator_b,
                           const ReviewIndex& reviews);

struct AgreementRow {
  std::string label;                         // domain name or "Overall Average"
  std::vector<std::optional<double>> pairs;  // one per annotator pair
  std::optional<double> average;             // mean of the pair columns
  std::optional<double> fleiss;              // all-rater Fleiss kappa
};

struct AgreementReport {
  std::vector<std::string> annotators;  // sorted ids
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<AgreementRow> emotion_rows;  // per domain, then overall
  std::vector<AgreementRow> trigger_rows;
};

/// Domain-wise agreement, one row per domain plus an overall row. Pair
/// columns for three annotators follow (1,2), (2,3), (1,3). The overall row
/// averages the domain rows. Trigger agreement pools token items across
/// emotions.
AgreementReport compute_agreement(std::span<const AnnotationRecord> records,
                                  const ReviewIndex& reviews);

enum class TableFormat { kTable, kCsv };

std::string format_agreement(const AgreementReport& report, TableFormat format);

// ---------------------------------------------------------------------------

struct EmotionStatistics {
  std::size_t count = 0;
  double percentage = 0;  // share of the domain's emotion assignments, in %
  std::size_t total_triggers = 0;
  double avg_triggers = 0;        // per occurrence of the emotion
  double avg_trigger_tokens = 0;  // tokens per trigger
};

struct DomainStatistics {
  std::size_t reviews = 0;
  std::size_t total_emotions = 0;
  double avg_emotions_per_review = 0;
  std::array<EmotionStatistics, kEmotionCount> emotions{};
};

struct GoldStatistics {
  std::array<DomainStatistics, kDomainCount> domains{};
  DomainStatistics overall;
};

GoldStatistics gold_statistics(std::span<const GoldRecord> gold, const ReviewIndex& reviews);

/// Rows: overall block, then one block per emotion; columns: the six
/// domains and an overall column.
std::string format_gold_statistics(const GoldStatistics& stats, TableFormat format);

}  // namespace eot
