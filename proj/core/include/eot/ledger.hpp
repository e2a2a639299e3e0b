#pragma once

// Append-only run ledger and the experiment runner that fills it.
//
// Layout under a runs directory:
//   runs/<run_id>/manifest.json   immutable run manifest
//   runs/<run_id>/reviews.jsonl   snapshot of the reviews being run
//   runs/<run_id>/ledger.jsonl    one entry per completed request
//   runs/<run_id>/parsed.jsonl    written by scoring
//   runs/<run_id>/score.json      written by scoring

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eot/inference.hpp"
#include "eot/prompting.hpp"
#include "eot/types.hpp"

namespace eot {

enum class EntryStatus : std::uint8_t { kOk, kFailed };

struct RunLedgerEntry {
  std::string run_id;
  std::string review_id;
  Strategy strategy = Strategy::kZeroShot;
  std::string prompt_version;
  std::string raw_response;
  std::int64_t latency_ms = 0;
  int attempt_count = 0;
  EntryStatus status = EntryStatus::kOk;
  std::string error;  // set for Failed entries

  friend bool operator==(const RunLedgerEntry&, const RunLedgerEntry&) = default;
};

std::string format_ledger_entry(const RunLedgerEntry& entry);
/// Throws Error(kMalformedRecord).
RunLedgerEntry parse_ledger_entry(std::string_view line);

struct LedgerContents {
  std::vector<RunLedgerEntry> entries;
  std::size_t unreadable_lines = 0;  // e.g. a torn final line after a crash
};

LedgerContents read_ledger(const std::filesystem::path& path);

/// Per review: the latest Ok entry, otherwise the latest entry.
std::map<std::string, RunLedgerEntry, std::less<>> latest_entries(std::span<const RunLedgerEntry> entries);

/// Serializes appends from any number of threads; every entry is flushed
/// before append() returns.
class LedgerWriter {
 public:
  explicit LedgerWriter(const std::filesystem::path& path);
  void append(const RunLedgerEntry& entry);

 private:
  std::mutex mutex_;
  std::ofstream out_;
  std::filesystem::path path_;
};

struct RunPaths {
  std::filesystem::path dir;
  std::filesystem::path manifest;
  std::filesystem::path reviews;
  std::filesystem::path ledger;
  std::filesystem::path parsed;
  std::filesystem::path score;

  static RunPaths of(const std::filesystem::path& runs_dir, const std::string& run_id);
};

struct RunManifest {
  std::string run_id;
  std::string corpus_path;
  Strategy strategy = Strategy::kZeroShot;
  std::string profile_name;
  std::string model_id;
  std::string prompt_version;
  bool system_message = false;
  InferenceConfig config;
  std::string created_at;  // UTC, ISO 8601
  std::optional<std::uint64_t> seed;

  friend bool operator==(const RunManifest&, const RunManifest&) = default;
};

std::string format_run_manifest(const RunManifest& manifest);
RunManifest parse_run_manifest(std::string_view text);
/// Throws Error(kUnknownRun) when the run directory has no manifest.
RunManifest load_run_manifest(const std::filesystem::path& runs_dir, const std::string& run_id);

/// `run-<UTC timestamp>-<strategy>-<random hex>`.
std::string generate_run_id(Strategy strategy);
/// Throws Error(kInvalidArgument) unless the id is a safe directory name.
void validate_run_id(const std::string& run_id);

struct RunOptions {
  std::filesystem::path runs_dir = "runs";
  std::string run_id;  // empty: generate
  bool resume = false;
  std::string corpus_path;
  std::optional<std::uint64_t> seed;
  CompletionContext completion;
  std::function<void(const RunLedgerEntry&)> on_entry;
};

struct RunSummary {
  std::string run_id;
  std::size_t ok = 0;
  std::size_t failed = 0;
  std::size_t skipped = 0;  // already Ok from an earlier attempt

  bool partial_failure() const noexcept { return failed > 0; }
};

/// Runs every review through the provider with at most
/// profile.max_concurrency requests in flight, appending one ledger entry per
/// review. Request failures become Failed entries. With `resume`, reviews
/// already Ok in the ledger are skipped.
///
/// Throws Error(kAuthMissing) before any request, Error(kRunExists) when the
/// run exists and `resume` is off, Error(kUnknownRun) when resuming a run
/// that does not exist.
RunSummary run_experiment(std::span<const Review> reviews, Strategy strategy,
                          const ProviderProfile& profile, const InferenceConfig& config,
                          const RunOptions& options);

}  // namespace eot
