#pragma once

// Emotion and trigger scores between predictions and gold.
//
// Conventions:
//  * Emotion P/R/F1 are micro-averaged over (review, emotion) pairs across
//    all nine labels, Neutral included. Ratios with a zero denominator are 0.
//  * A predicted trigger is EM when its normalized text equals a gold
//    trigger of the same review and emotion, PM when it only shares a token
//    with one, and no-match otherwise. EM and PM are disjoint.
//  * ROUGE of two empty token lists is 1.
//  * Dataset ROUGE aligns predicted to gold triggers greedily by descending
//    ROUGE-L F1 within each (review, gold emotion) and averages over gold
//    triggers; unaligned gold triggers score 0.

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "eot/annotation.hpp"
#include "eot/types.hpp"

namespace eot {

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Harmonic mean, 0 unless both are positive.
double harmonic_f1(double precision, double recall) noexcept;

struct LabelScores {
  Prf prf;
  std::size_t hits = 0;
  std::size_t predicted = 0;
  std::size_t support = 0;  // gold count
};

struct EmotionScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t hits = 0;
  std::size_t n_pred = 0;
  std::size_t n_gold = 0;
  std::array<LabelScores, 9> per_emotion{};
  /// Unweighted mean over labels that occur in gold or predictions.
  Prf macro;
};

struct TriggerCounts {
  std::size_t n_pred = 0;
  std::size_t n_gold = 0;
  std::size_t n_em = 0;
  std::size_t n_pm = 0;
  std::size_t n_nomatch = 0;
};

struct TriggerMatch {
  double exact_match = 0.0;
  double partial_match = 0.0;
  TriggerCounts counts;
};

struct RougeAverages {
  double rouge1 = 0.0;
  double rougeL = 0.0;
};

struct TriggerScores {
  double exact_match = 0.0;
  double partial_match = 0.0;
  double rouge1 = 0.0;
  double rougeL = 0.0;
  TriggerCounts counts;
};

/// Square 9x9 matrix indexed [predicted][gold] in Emotion order.
struct ConfusionMatrix {
  std::array<std::array<double, 9>, 9> cells{};
  std::array<double, 9> unpaired_predicted{};  // spurious with nothing missed
  std::array<double, 9> unpaired_gold{};       // missed with nothing spurious

  double at(Emotion predicted, Emotion gold) const noexcept {
    return cells[index_of(predicted)][index_of(gold)];
  }
};

// Each dataset-level function pairs every prediction with the gold record of
// the same review_id and throws Error(kMissingGold) when there is none. Gold
// records without a prediction are ignored. Duplicate prediction ids throw
// Error(kInvalidArgument).

EmotionScores emotion_prf(std::span<const EotOutput> pred, std::span<const GoldRecord> gold);
TriggerMatch trigger_em_pm(std::span<const EotOutput> pred, std::span<const GoldRecord> gold);

Prf rouge1(std::span<const std::string> pred_tokens, std::span<const std::string> gold_tokens);
Prf rougeL(std::span<const std::string> pred_tokens, std::span<const std::string> gold_tokens);

/// With no gold triggers anywhere, both averages are 1 when nothing was
/// predicted and 0 otherwise.
RougeAverages align_and_average_rouge(std::span<const EotOutput> pred, std::span<const GoldRecord> gold);

ConfusionMatrix confusion_matrix(std::span<const EotOutput> pred, std::span<const GoldRecord> gold);

struct Scores {
  EmotionScores emotion;
  TriggerScores trigger;
};

Scores score(std::span<const EotOutput> pred, std::span<const GoldRecord> gold);

}  // namespace eot
