#pragma once

// Corpus loading, length filtering, and seeded sampling (SRSWOR over items,
// temporally stratified SRSWOR over each item's reviews).

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eot/types.hpp"

namespace eot {

enum class StrataGranularity : std::uint8_t { kYear, kQuarter };

std::string_view to_string(StrataGranularity g) noexcept;

struct SamplingPlan {
  std::uint64_t seed = 0;
  std::size_t items_per_group = 40;   // items drawn per domain
  std::size_t reviews_per_item = 10;  // m
  std::size_t min_tokens = 10;
  std::size_t max_tokens = 100;
  StrataGranularity strata_granularity = StrataGranularity::kYear;

  /// Throws Error(kInvalidArgument) when an invariant is violated.
  void validate() const;
};

/// Reads a plan from the key/value format (`seed = 7`, ...). Missing keys
/// keep their defaults.
SamplingPlan load_plan(const std::filesystem::path& path);
SamplingPlan parse_plan(std::string_view text, std::string_view source = "<plan>");
std::string format_plan(const SamplingPlan& plan);

struct Rejection {
  std::size_t line;  // 1-based
  std::string reason;
};

struct CorpusFile {
  Source source = Source::kAmazon;
  std::vector<Review> records;
  std::vector<Rejection> rejections;
};

/// Loads one source's line-delimited review dump. The source is taken from
/// the first well-formed record; lines that are malformed, duplicate an id,
/// or belong to another source are rejected with their line numbers.
/// Throws Error(kIo) or Error(kEmptyCorpus) when nothing loads.
CorpusFile load_corpus(const std::filesystem::path& path);
CorpusFile parse_corpus(std::span<const std::string> lines, std::string_view source_name);

/// Reads a review file with no single-source restriction (sample files).
/// Any malformed line throws Error(kMalformedRecord).
std::vector<Review> load_reviews(const std::filesystem::path& path);
void write_reviews(const std::filesystem::path& path, std::span<const Review> reviews);
std::string format_reviews(std::span<const Review> reviews);

std::vector<Review> filter_by_length(std::span<const Review> reviews,
                                     const SamplingPlan& plan);

// ---------------------------------------------------------------------------
// Seeded randomness.

/// SplitMix64; the output stream is fixed by the seed on every platform.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}
  std::uint64_t next() noexcept;
  /// Unbiased draw from [0, bound); bound must be positive.
  std::uint64_t below(std::uint64_t bound) noexcept;

 private:
  std::uint64_t state_;
};

/// Child seed for a keyed sub-stream. Independent keys give independent
/// streams, so adding an item never changes another item's draw.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::string_view> keys);

/// Indices of a simple random sample without replacement, in selection
/// order (partial Fisher-Yates). Throws Error(kSampleTooLarge).
std::vector<std::size_t> srswor_indices(std::size_t population_size, std::size_t n,
                                        std::uint64_t seed);

template <class T>
std::vector<T> srswor(std::span<const T> population, std::size_t n, std::uint64_t seed) {
  std::vector<T> out;
  out.reserve(n);
  for (std::size_t i : srswor_indices(population.size(), n, seed)) out.push_back(population[i]);
  return out;
}

// ---------------------------------------------------------------------------
// Temporal stratification.

/// "2019", "2019-Q3", or "unknown" when the review has no timestamp. Keys
/// sort chronologically with "unknown" last.
std::string stratum_key(const Review& review, StrataGranularity granularity);

/// Proportional allocation of m slots by largest remainder; ties go to the
/// earlier stratum. Requires m <= sum(sizes).
std::vector<std::size_t> largest_remainder(std::span<const std::size_t> sizes, std::size_t m);

struct StratumAllocation {
  std::string key;
  std::size_t available = 0;
  std::size_t selected = 0;
};

struct StratifiedSample {
  std::vector<Review> reviews;
  std::vector<StratumAllocation> strata;
};

/// Draws plan.reviews_per_item reviews from one item. Throws
/// Error(kInsufficientReviews) when the item has fewer reviews.
StratifiedSample stratified_review_sample(std::span<const Review> reviews_of_item,
                                          const SamplingPlan& plan);

// ---------------------------------------------------------------------------
// Whole-corpus sampling.

struct ItemSample {
  std::string item_id;
  std::size_t reviews_before_filter = 0;
  std::size_t reviews_after_filter = 0;
  std::vector<StratumAllocation> strata;
};

struct DomainSample {
  Domain domain = Domain::kBeauty;
  std::size_t population_items = 0;
  std::vector<ItemSample> items;

  /// Sampling fraction n/|P|; equal to each item's inclusion probability.
  double sampling_fraction() const noexcept;
};

struct CorpusSample {
  std::vector<Review> reviews;
  std::vector<DomainSample> domains;
};

/// Per domain: SRSWOR over items (first-appearance order), then a length
/// filter and a stratified draw inside each chosen item.
CorpusSample sample_corpus(std::span<const Review> reviews, const SamplingPlan& plan);

std::string format_sample_manifest(const CorpusSample& sample, const SamplingPlan& plan,
                                   std::span<const std::string> corpus_paths);

}  // namespace eot
