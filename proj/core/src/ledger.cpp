#include "eot/ledger.hpp"

#include <algorithm>
#include <atomic>
#include <ctime>
#include <exception>
#include <random>
#include <set>
#include <thread>

#include "eot/corpus.hpp"
#include "eot/error.hpp"
#include "json_records.hpp"
#include "kv.hpp"

namespace eot {

using detail::json;
using detail::ojson;

namespace {

std::string_view to_string(EntryStatus s) noexcept { return s == EntryStatus::kOk ? "Ok" : "Failed"; }

Error malformed(const std::string& what) { return Error(ErrorCode::kMalformedRecord, what); }

Strategy strategy_field(const json& doc, std::string_view what) {
  const std::string raw = detail::require_string(doc, "strategy", what);
  auto s = parse_strategy(raw);
  if (!s) throw malformed(std::string(what) + ": unknown strategy '" + raw + "'");
  return *s;
}

std::int64_t int_field(const json& doc, std::string_view key, std::string_view what) {
  const json& v = detail::require(doc, key, what);
  if (!v.is_number_integer()) throw malformed(std::string(what) + ": '" + std::string(key) + "' must be an integer");
  return v.get<std::int64_t>();
}

double number_field(const json& doc, std::string_view key, std::string_view what) {
  const json& v = detail::require(doc, key, what);
  if (!v.is_number()) throw malformed(std::string(what) + ": '" + std::string(key) + "' must be a number");
  return v.get<double>();
}

}  // namespace

std::string format_ledger_entry(const RunLedgerEntry& e) {
  ojson doc;
  doc["format_version"] = detail::kFormatVersion;
  doc["run_id"] = e.run_id;
  doc["review_id"] = e.review_id;
  doc["strategy"] = to_string(e.strategy);
  doc["prompt_version"] = e.prompt_version;
  doc["status"] = to_string(e.status);
  doc["attempt_count"] = e.attempt_count;
  doc["latency_ms"] = e.latency_ms;
  doc["raw_response"] = e.raw_response;
  if (!e.error.empty()) doc["error"] = e.error;
  return detail::dump_line(doc);
}

RunLedgerEntry parse_ledger_entry(std::string_view line) {
  constexpr std::string_view what = "ledger entry";
  const json doc = detail::parse_json(line, what);
  if (!doc.is_object()) throw malformed("ledger entry is not an object");
  RunLedgerEntry e;
  e.run_id = detail::require_string(doc, "run_id", what);
  e.review_id = detail::require_string(doc, "review_id", what);
  e.strategy = strategy_field(doc, what);
  e.prompt_version = detail::require_string(doc, "prompt_version", what);
  const std::string status = detail::require_string(doc, "status", what);
  if (status == "Ok") e.status = EntryStatus::kOk;
  else if (status == "Failed") e.status = EntryStatus::kFailed;
  else throw malformed("ledger entry: unknown status '" + status + "'");
  e.attempt_count = static_cast<int>(int_field(doc, "attempt_count", what));
  e.latency_ms = int_field(doc, "latency_ms", what);
  e.raw_response = detail::require_string(doc, "raw_response", what);
  if (doc.contains("error")) e.error = detail::require_string(doc, "error", what);
  return e;
}

LedgerContents read_ledger(const std::filesystem::path& path) {
  LedgerContents out;
  if (!std::filesystem::exists(path)) return out;
  for (const auto& line : detail::read_lines(path)) {
    if (detail::trim(line).empty()) continue;
    try {
      out.entries.push_back(parse_ledger_entry(line));
    } catch (const Error&) {
      ++out.unreadable_lines;
    }
  }
  return out;
}

std::map<std::string, RunLedgerEntry, std::less<>> latest_entries(std::span<const RunLedgerEntry> entries) {
  std::map<std::string, RunLedgerEntry, std::less<>> out;
  for (const auto& e : entries) {
    auto it = out.find(e.review_id);
    if (it == out.end()) {
      out.emplace(e.review_id, e);
    } else if (e.status == EntryStatus::kOk || it->second.status != EntryStatus::kOk) {
      it->second = e;
    }
  }
  return out;
}

LedgerWriter::LedgerWriter(const std::filesystem::path& path) : path_(path) {
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  // A crash can leave a torn final line; start fresh entries on a new line.
  bool needs_newline = false;
  if (std::filesystem::exists(path) && std::filesystem::file_size(path) > 0) {
    std::ifstream in(path, std::ios::binary);
    in.seekg(-1, std::ios::end);
    char last = '\n';
    in.get(last);
    needs_newline = last != '\n';
  }
  out_.open(path, std::ios::binary | std::ios::app);
  if (!out_) throw Error(ErrorCode::kIo, "cannot open ledger " + path.string());
  if (needs_newline) out_ << '\n' << std::flush;
}

void LedgerWriter::append(const RunLedgerEntry& entry) {
  const std::string line = format_ledger_entry(entry);
  std::lock_guard lock(mutex_);
  out_ << line << '\n';
  out_.flush();
  if (!out_) throw Error(ErrorCode::kIo, "cannot append to ledger " + path_.string());
}

RunPaths RunPaths::of(const std::filesystem::path& runs_dir, const std::string& run_id) {
  RunPaths p;
  p.dir = runs_dir / run_id;
  p.manifest = p.dir / "manifest.json";
  p.reviews = p.dir / "reviews.jsonl";
  p.ledger = p.dir / "ledger.jsonl";
  p.parsed = p.dir / "parsed.jsonl";
  p.score = p.dir / "score.json";
  return p;
}

std::string format_run_manifest(const RunManifest& m) {
  ojson doc;
  doc["format_version"] = detail::kFormatVersion;
  doc["kind"] = "run_manifest";
  doc["run_id"] = m.run_id;
  doc["corpus_path"] = m.corpus_path;
  doc["strategy"] = to_string(m.strategy);
  doc["profile"] = m.profile_name;
  doc["model_id"] = m.model_id;
  doc["prompt_version"] = m.prompt_version;
  doc["system_message"] = m.system_message;
  doc["config"] = ojson{{"temperature", m.config.temperature},
                        {"top_p", m.config.top_p},
                        {"top_k", m.config.top_k},
                        {"max_tokens", m.config.max_tokens},
                        {"n", m.config.n}};
  doc["created_at"] = m.created_at;
  doc["seed"] = m.seed ? ojson(*m.seed) : ojson(nullptr);
  return doc.dump(2) + "\n";
}

RunManifest parse_run_manifest(std::string_view text) {
  constexpr std::string_view what = "run manifest";
  const json doc = detail::parse_json(text, what);
  if (!doc.is_object()) throw malformed("run manifest is not an object");
  RunManifest m;
  m.run_id = detail::require_string(doc, "run_id", what);
  m.corpus_path = detail::require_string(doc, "corpus_path", what);
  m.strategy = strategy_field(doc, what);
  m.profile_name = detail::require_string(doc, "profile", what);
  m.model_id = detail::require_string(doc, "model_id", what);
  m.prompt_version = detail::require_string(doc, "prompt_version", what);
  const json& sys = detail::require(doc, "system_message", what);
  if (!sys.is_boolean()) throw malformed("run manifest: 'system_message' must be a boolean");
  m.system_message = sys.get<bool>();
  const json& cfg = detail::require(doc, "config", what);
  if (!cfg.is_object()) throw malformed("run manifest: 'config' must be an object");
  m.config.temperature = number_field(cfg, "temperature", what);
  m.config.top_p = number_field(cfg, "top_p", what);
  m.config.top_k = int_field(cfg, "top_k", what);
  m.config.max_tokens = int_field(cfg, "max_tokens", what);
  m.config.n = int_field(cfg, "n", what);
  m.created_at = detail::require_string(doc, "created_at", what);
  const json& seed = detail::require(doc, "seed", what);
  if (seed.is_number_unsigned()) m.seed = seed.get<std::uint64_t>();
  else if (!seed.is_null()) throw malformed("run manifest: 'seed' must be an unsigned integer or null");
  return m;
}

RunManifest load_run_manifest(const std::filesystem::path& runs_dir, const std::string& run_id) {
  validate_run_id(run_id);
  const RunPaths paths = RunPaths::of(runs_dir, run_id);
  if (!std::filesystem::exists(paths.manifest))
    throw Error(ErrorCode::kUnknownRun, "no run '" + run_id + "' under " + runs_dir.string());
  return parse_run_manifest(detail::read_file(paths.manifest));
}

namespace {

std::string utc_now(const char* format) {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, format, &tm);
  return buf;
}

}  // namespace

std::string generate_run_id(Strategy strategy) {
  std::random_device rd;
  char hex[8];
  std::snprintf(hex, sizeof hex, "%06x", static_cast<unsigned>(rd() & 0xFFFFFFu));
  return "run-" + utc_now("%Y%m%dT%H%M%SZ") + "-" + std::string(to_string(strategy)) + "-" + hex;
}

void validate_run_id(const std::string& run_id) {
  const bool ok = !run_id.empty() && run_id != "." && run_id != ".." && run_id.size() <= 128 &&
                  std::all_of(run_id.begin(), run_id.end(), [](char c) {
                    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                           c == '-' || c == '_' || c == '.';
                  });
  if (!ok)
    throw Error(ErrorCode::kInvalidArgument,
                "run id '" + run_id + "' must be letters, digits, '.', '-' or '_'");
}

RunSummary run_experiment(std::span<const Review> reviews, Strategy strategy,
                          const ProviderProfile& profile, const InferenceConfig& config,
                          const RunOptions& options) {
  profile.validate();
  config.validate();
  require_auth_token(profile, options.completion);

  RunSummary summary;
  summary.run_id = options.run_id.empty() ? generate_run_id(strategy) : options.run_id;
  validate_run_id(summary.run_id);
  const RunPaths paths = RunPaths::of(options.runs_dir, summary.run_id);

  std::set<std::string, std::less<>> done;
  if (std::filesystem::exists(paths.manifest)) {
    if (!options.resume)
      throw Error(ErrorCode::kRunExists,
                  "run '" + summary.run_id + "' already exists; pass --resume to continue it");
    const RunManifest m = parse_run_manifest(detail::read_file(paths.manifest));
    if (m.strategy != strategy || m.prompt_version != prompt_version() || m.model_id != profile.model_id)
      throw Error(ErrorCode::kInvalidArgument,
                  "run '" + summary.run_id + "' was started with strategy " + std::string(to_string(m.strategy)) +
                      ", model " + m.model_id + ", prompts " + m.prompt_version +
                      "; resume it with the same settings");
    std::set<std::string, std::less<>> snapshot_ids, given_ids;
    for (const auto& r : load_reviews(paths.reviews)) snapshot_ids.insert(r.review_id);
    for (const auto& r : reviews) given_ids.insert(r.review_id);
    if (snapshot_ids != given_ids)
      throw Error(ErrorCode::kInvalidArgument,
                  "run '" + summary.run_id + "' covers a different set of reviews");
    for (const auto& e : read_ledger(paths.ledger).entries)
      if (e.status == EntryStatus::kOk) done.insert(e.review_id);
  } else {
    if (options.resume)
      throw Error(ErrorCode::kUnknownRun, "no run '" + summary.run_id + "' to resume under " +
                                              options.runs_dir.string());
    std::filesystem::create_directories(paths.dir);
    RunManifest m;
    m.run_id = summary.run_id;
    m.corpus_path = options.corpus_path;
    m.strategy = strategy;
    m.profile_name = profile.name;
    m.model_id = profile.model_id;
    m.prompt_version = std::string(prompt_version());
    m.system_message = strategy == Strategy::kEotDetect;
    m.config = config;
    m.created_at = utc_now("%Y-%m-%dT%H:%M:%SZ");
    m.seed = options.seed;
    write_reviews(paths.reviews, reviews);
    detail::write_file(paths.manifest, format_run_manifest(m));
  }

  std::vector<const Review*> pending;
  for (const auto& r : reviews) {
    if (done.contains(r.review_id)) ++summary.skipped;
    else pending.push_back(&r);
  }

  LedgerWriter writer(paths.ledger);
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> ok{0}, failed{0};
  std::atomic<bool> abort{false};
  std::mutex callback_mutex;
  std::exception_ptr fatal;

  auto worker = [&] {
    while (!abort) {
      const std::size_t i = next++;
      if (i >= pending.size()) return;
      const Review& review = *pending[i];
      RunLedgerEntry entry;
      entry.run_id = summary.run_id;
      entry.review_id = review.review_id;
      entry.strategy = strategy;
      entry.prompt_version = std::string(prompt_version());
      const auto started = std::chrono::steady_clock::now();
      try {
        const auto messages = render_messages(build_prompt(strategy, review));
        const CompletionResult result = complete(profile, messages, config, options.completion);
        entry.raw_response = result.text;
        entry.attempt_count = result.attempts;
        entry.latency_ms = result.latency.count();
        entry.status = EntryStatus::kOk;
      } catch (const Error& e) {
        entry.status = EntryStatus::kFailed;
        entry.attempt_count = e.attempts();
        entry.error = e.what();
        entry.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                               std::chrono::steady_clock::now() - started)
                               .count();
      } catch (const std::exception& e) {
        entry.status = EntryStatus::kFailed;
        entry.error = e.what();
      }
      try {
        writer.append(entry);
        (entry.status == EntryStatus::kOk ? ok : failed)++;
        if (options.on_entry) {
          std::lock_guard lock(callback_mutex);
          options.on_entry(entry);
        }
      } catch (...) {
        std::lock_guard lock(callback_mutex);
        if (!fatal) fatal = std::current_exception();
        abort = true;
      }
    }
  };

  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(profile.max_concurrency), pending.size());
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (fatal) std::rethrow_exception(fatal);
  summary.ok = ok;
  summary.failed = failed;
  return summary;
}

}  // namespace eot
