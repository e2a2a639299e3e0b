#pragma once

// Multi-annotator records and gold-standard aggregation.

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "eot/corpus.hpp"
#include "eot/types.hpp"

namespace eot {

struct AnnotationRecord {
  std::string review_id;
  std::string annotator_id;
  EotOutput output;
};

struct TriggerProvenance {
  Emotion emotion;
  TriggerSpan span;
  /// Annotators whose spans were merged into this one (same normalized
  /// text, or absorbed as a shorter overlapping span). Sorted.
  std::vector<std::string> annotators;
};

struct GoldProvenance {
  std::array<int, kEmotionCount> votes{};
  bool no_majority = false;
  std::vector<TriggerProvenance> triggers;
};

struct GoldRecord {
  std::string review_id;
  EotOutput output;
  GoldProvenance provenance;
};

/// Majority aggregation of exactly three annotations of one review.
///
/// An emotion is kept when at least two annotators list it. Its triggers are
/// the union over all annotators, deduplicated on normalized text; among
/// overlapping spans the longest survives (ties: leftmost, then smallest
/// text). Neutral wins by the same vote; when nothing reaches two votes the
/// gold is Neutral with `no_majority` set.
///
/// Throws Error(kWrongAnnotatorCount) or Error(kMismatchedReviewIds).
GoldRecord aggregate_gold(std::span<const AnnotationRecord> annotations);

struct AnnotationFile {
  std::vector<AnnotationRecord> records;
  std::vector<Rejection> rejections;
};

/// Reads line-delimited annotation objects
/// `{"review_id", "annotator_id", "emotions": [{"emotion", "triggers"}]}`.
/// Records that reference unknown reviews or violate the output invariants
/// are rejected with their line numbers.
AnnotationFile load_annotations(const std::filesystem::path& path, const ReviewIndex& reviews);
AnnotationFile parse_annotations(std::span<const std::string> lines, const ReviewIndex& reviews);

/// Groups records by review (first-appearance order) and aggregates each
/// group. Any group without exactly three records throws.
std::vector<GoldRecord> aggregate_all(std::span<const AnnotationRecord> records);

std::string format_gold(std::span<const GoldRecord> gold);
void write_gold(const std::filesystem::path& path, std::span<const GoldRecord> gold);

/// Reads a gold file. Trigger offsets come from provenance when present,
/// otherwise from the first occurrence in the review text. Records for
/// reviews missing from `reviews` are errors unless `skip_unknown` is set.
std::vector<GoldRecord> load_gold(const std::filesystem::path& path, const ReviewIndex& reviews,
                                  bool skip_unknown = false);
std::vector<GoldRecord> parse_gold(std::span<const std::string> lines, const ReviewIndex& reviews,
                                   bool skip_unknown = false);

}  // namespace eot
