#include "commands.hpp"

#include <csignal>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "eot/agreement.hpp"
#include "eot/annotation.hpp"
#include "eot/corpus.hpp"
#include "eot/extraction.hpp"
#include "eot/inference.hpp"
#include "eot/ledger.hpp"
#include "eot/metrics.hpp"
#include "eot/mock_provider.hpp"
#include "eot/prompting.hpp"
#include "eot/report.hpp"

namespace eot::cli {

namespace fs = std::filesystem;

int exit_code(ErrorClass error_class) noexcept {
  switch (error_class) {
    case ErrorClass::kUsage: return kExitUsage;
    case ErrorClass::kData: return kExitData;
    case ErrorClass::kProvider: return kExitProvider;
  }
  return kExitInternal;
}

namespace {

void write_text(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    f << content;
    if (!f) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  }
  fs::rename(tmp, path);
}

std::string read_text(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

std::vector<Review> load_all_reviews(const std::vector<std::string>& paths) {
  if (paths.empty()) throw Error(ErrorCode::kInvalidArgument, "--corpus is required");
  std::vector<Review> all;
  for (const auto& p : paths) {
    auto part = load_reviews(p);
    all.insert(all.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  return all;
}

std::vector<AnnotationRecord> load_all_annotations(const std::vector<std::string>& paths,
                                                   const ReviewIndex& index, std::ostream& err) {
  if (paths.empty()) throw Error(ErrorCode::kInvalidArgument, "--annotations is required");
  std::vector<AnnotationRecord> all;
  for (const auto& p : paths) {
    AnnotationFile file = load_annotations(p, index);
    for (const auto& r : file.rejections) err << p << ":" << r.line << ": skipped: " << r.reason << "\n";
    all.insert(all.end(), std::make_move_iterator(file.records.begin()),
               std::make_move_iterator(file.records.end()));
  }
  return all;
}

ProviderProfile resolve_profile(const std::string& spec) {
  fs::path file = spec;
  std::string name;
  if (!fs::exists(file)) {
    const auto colon = spec.rfind(':');
    if (colon != std::string::npos) {
      file = spec.substr(0, colon);
      name = spec.substr(colon + 1);
    }
  }
  if (!fs::exists(file)) throw Error(ErrorCode::kInvalidArgument, "profile file not found: " + file.string());
  const auto profiles = load_profiles(file);
  return select_profile(profiles, name);
}

Strategy strategy_arg(const std::string& raw) {
  auto s = parse_strategy(raw);
  if (!s) throw Error(ErrorCode::kInvalidArgument, "unknown strategy '" + raw + "' (zs, zs-cot, eot-detect)");
  return *s;
}

TableFormat format_arg(const std::string& raw) {
  if (raw == "table") return TableFormat::kTable;
  if (raw == "csv") return TableFormat::kCsv;
  throw Error(ErrorCode::kInvalidArgument, "unknown format '" + raw + "' (table, csv)");
}

void emit(const std::string& text, const std::string& out_path, std::ostream& out) {
  if (out_path.empty()) out << text;
  else write_text(out_path, text);
}

struct Options {
  std::vector<std::string> corpus;
  std::vector<std::string> annotations;
  std::string plan;
  std::optional<std::uint64_t> seed;
  std::string strategy;
  std::string profile;
  std::string config;
  std::vector<std::string> run_ids;
  std::string gold;
  std::string out;
  std::string manifest;
  std::string runs_dir = "runs";
  std::string format = "table";
  std::string review_id;
  std::string responses;
  std::string host = "127.0.0.1";
  int port = 0;
  bool resume = false;
};

int cmd_sample(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.out.empty()) throw Error(ErrorCode::kInvalidArgument, "--out is required");
  if (o.corpus.empty()) throw Error(ErrorCode::kInvalidArgument, "--corpus is required");
  SamplingPlan plan = o.plan.empty() ? SamplingPlan{} : load_plan(o.plan);
  if (o.seed) plan.seed = *o.seed;
  plan.validate();

  std::vector<Review> reviews;
  for (const auto& path : o.corpus) {
    CorpusFile file = load_corpus(path);
    for (const auto& r : file.rejections) err << path << ":" << r.line << ": skipped: " << r.reason << "\n";
    reviews.insert(reviews.end(), std::make_move_iterator(file.records.begin()),
                   std::make_move_iterator(file.records.end()));
  }
  const CorpusSample sample = sample_corpus(reviews, plan);
  write_reviews(o.out, sample.reviews);
  const std::string manifest_path = o.manifest.empty() ? o.out + ".manifest.json" : o.manifest;
  write_text(manifest_path, format_sample_manifest(sample, plan, o.corpus));
  out << "sampled " << sample.reviews.size() << " reviews -> " << o.out << "\n";
  return kExitOk;
}

int cmd_aggregate(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.out.empty()) throw Error(ErrorCode::kInvalidArgument, "--out is required");
  const auto reviews = load_all_reviews(o.corpus);
  const ReviewIndex index = index_reviews(reviews);
  const auto records = load_all_annotations(o.annotations, index, err);
  const auto gold = aggregate_all(records);
  write_gold(o.out, gold);
  std::size_t no_majority = 0;
  for (const auto& g : gold) no_majority += g.provenance.no_majority ? 1 : 0;
  out << "aggregated " << gold.size() << " reviews (" << no_majority << " without majority) -> " << o.out << "\n";
  return kExitOk;
}

int cmd_agreement(const Options& o, std::ostream& out, std::ostream& err) {
  const auto reviews = load_all_reviews(o.corpus);
  const ReviewIndex index = index_reviews(reviews);
  const auto records = load_all_annotations(o.annotations, index, err);
  emit(format_agreement(compute_agreement(records, index), format_arg(o.format)), o.out, out);
  return kExitOk;
}

int cmd_stats(const Options& o, std::ostream& out, std::ostream&) {
  if (o.gold.empty()) throw Error(ErrorCode::kInvalidArgument, "--gold is required");
  const auto reviews = load_all_reviews(o.corpus);
  const ReviewIndex index = index_reviews(reviews);
  const auto gold = load_gold(o.gold, index);
  emit(format_gold_statistics(gold_statistics(gold, index), format_arg(o.format)), o.out, out);
  return kExitOk;
}

int cmd_run(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.strategy.empty()) throw Error(ErrorCode::kInvalidArgument, "--strategy is required");
  if (o.profile.empty()) throw Error(ErrorCode::kInvalidArgument, "--profile is required");
  if (o.run_ids.size() > 1) throw Error(ErrorCode::kInvalidArgument, "run takes one --run-id");
  const Strategy strategy = strategy_arg(o.strategy);
  const ProviderProfile profile = resolve_profile(o.profile);
  const InferenceConfig config = o.config.empty() ? default_config() : load_config(o.config);

  RunOptions options;
  options.runs_dir = o.runs_dir;
  options.run_id = o.run_ids.empty() ? std::string() : o.run_ids.front();
  options.resume = o.resume;
  options.seed = o.seed;

  std::vector<Review> reviews;
  if (o.corpus.empty()) {
    if (!o.resume || options.run_id.empty())
      throw Error(ErrorCode::kInvalidArgument, "--corpus is required unless resuming a run");
    load_run_manifest(o.runs_dir, options.run_id);
    reviews = load_reviews(RunPaths::of(o.runs_dir, options.run_id).reviews);
  } else {
    reviews = load_all_reviews(o.corpus);
    for (std::size_t i = 0; i < o.corpus.size(); ++i) options.corpus_path += (i ? "," : "") + o.corpus[i];
  }
  if (options.corpus_path.empty() && !options.run_id.empty() && o.resume)
    options.corpus_path = load_run_manifest(o.runs_dir, options.run_id).corpus_path;

  auto log_mutex = std::make_shared<std::mutex>();
  options.completion.log = [&err, log_mutex](std::string_view msg) {
    std::lock_guard lock(*log_mutex);
    err << msg << "\n";
  };

  const RunSummary summary = run_experiment(reviews, strategy, profile, config, options);
  err << "run " << summary.run_id << ": " << summary.ok << " ok, " << summary.failed << " failed, "
      << summary.skipped << " already done\n";
  out << summary.run_id << "\n";
  return summary.partial_failure() ? kExitProvider : kExitOk;
}

int cmd_score(const Options& o, std::ostream& out, std::ostream&) {
  if (o.run_ids.size() != 1) throw Error(ErrorCode::kInvalidArgument, "score takes exactly one --run-id");
  if (o.gold.empty()) throw Error(ErrorCode::kInvalidArgument, "--gold is required");
  const ScoreReport report = score_run(o.runs_dir, o.run_ids.front(), o.gold);
  emit(format_score_report(report, format_arg(o.format)), o.out, out);
  return kExitOk;
}

int cmd_report(const Options& o, std::ostream& out, std::ostream&) {
  if (o.run_ids.empty()) throw Error(ErrorCode::kInvalidArgument, "--run-id is required");
  std::vector<ScoreRow> rows;
  for (const auto& id : o.run_ids) {
    load_run_manifest(o.runs_dir, id);
    const RunPaths paths = RunPaths::of(o.runs_dir, id);
    if (!fs::exists(paths.score))
      throw Error(ErrorCode::kUnknownRun, "run '" + id + "' has not been scored; run `eotbench score` first");
    rows.push_back(parse_score_row(read_text(paths.score)));
  }
  emit(format_comparison(rows, format_arg(o.format)), o.out, out);
  return kExitOk;
}

int cmd_prompt(const Options& o, std::ostream& out, std::ostream&) {
  if (o.strategy.empty()) throw Error(ErrorCode::kInvalidArgument, "--strategy is required");
  const Strategy strategy = strategy_arg(o.strategy);
  const auto reviews = load_all_reviews(o.corpus);
  const Review* review = reviews.empty() ? nullptr : &reviews.front();
  if (!o.review_id.empty()) {
    review = nullptr;
    for (const auto& r : reviews)
      if (r.review_id == o.review_id) review = &r;
    if (!review) throw Error(ErrorCode::kInvalidArgument, "no review '" + o.review_id + "' in the corpus");
  }
  if (!review) throw Error(ErrorCode::kEmptyCorpus, "corpus has no reviews");
  emit(format_messages(render_messages(build_prompt(strategy, *review))), o.out, out);
  return kExitOk;
}

MockProvider* g_serving = nullptr;

extern "C" void stop_serving(int) {
  if (g_serving) g_serving->stop();
}

// Scripted replies: one JSON object per line, {"review_id", "content"} with
// an optional "status".
std::vector<std::pair<std::string, MockReply>> load_scripted(const fs::path& path, const ReviewIndex& index) {
  std::vector<std::pair<std::string, MockReply>> out;
  std::istringstream lines(read_text(path));
  std::string line;
  std::size_t n = 0;
  while (std::getline(lines, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto doc = nlohmann::json::parse(line, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("review_id") || !doc["review_id"].is_string())
      throw Error(ErrorCode::kMalformedRecord, path.string() + ":" + std::to_string(n) + ": bad scripted reply");
    const auto review = index.find(doc["review_id"].get<std::string>());
    if (review == index.end())
      throw Error(ErrorCode::kMalformedRecord, path.string() + ":" + std::to_string(n) + ": unknown review");
    MockReply reply;
    reply.content = doc.value("content", "");
    reply.status = doc.value("status", 200);
    out.emplace_back(review->second.text, std::move(reply));
  }
  return out;
}

int cmd_serve_mock(const Options& o, std::ostream& out, std::ostream&) {
  const auto reviews = load_all_reviews(o.corpus);
  const ReviewIndex index = index_reviews(reviews);
  std::vector<std::pair<std::string, MockReply>> replies;
  if (!o.responses.empty()) {
    replies = load_scripted(o.responses, index);
  } else if (!o.gold.empty()) {
    for (const auto& g : load_gold(o.gold, index)) {
      MockReply reply;
      reply.content = gold_echo_response(g);
      replies.emplace_back(index.find(g.review_id)->second.text, std::move(reply));
    }
  } else {
    throw Error(ErrorCode::kInvalidArgument, "serve-mock needs --gold or --responses");
  }
  MockProvider server(scripted_handler(std::move(replies)), o.host, o.port);
  out << server.base_url() << std::endl;
  g_serving = &server;
  std::signal(SIGINT, stop_serving);
  std::signal(SIGTERM, stop_serving);
  server.wait();
  g_serving = nullptr;
  return kExitOk;
}

}  // namespace

ScoreReport score_run(const fs::path& runs_dir, const std::string& run_id, const fs::path& gold_path) {
  const RunManifest manifest = load_run_manifest(runs_dir, run_id);
  const RunPaths paths = RunPaths::of(runs_dir, run_id);
  const std::vector<Review> reviews = load_reviews(paths.reviews);
  const ReviewIndex index = index_reviews(reviews);
  const std::vector<GoldRecord> gold = load_gold(gold_path, index, /*skip_unknown=*/true);

  const LedgerContents ledger = read_ledger(paths.ledger);
  const auto latest = latest_entries(ledger.entries);

  ScoreReport report;
  report.run_id = run_id;
  report.model_id = manifest.model_id;
  report.strategy = std::string(to_string(manifest.strategy));
  report.prompt_version = manifest.prompt_version;

  std::vector<EotOutput> predictions;
  std::vector<ParseReport> parsed;
  predictions.reserve(reviews.size());
  for (const auto& review : reviews) {
    const auto it = latest.find(review.review_id);
    if (it == latest.end()) {
      ++report.parse.reviews;
      ++report.parse.missing_entries;
      predictions.push_back({review.review_id, {}});
      continue;
    }
    if (it->second.status != EntryStatus::kOk) {
      ++report.parse.reviews;
      ++report.parse.failed_requests;
      predictions.push_back({review.review_id, {}});
      continue;
    }
    ParseReport pr = parse_output(it->second.raw_response, review);
    report.parse.add(pr);
    predictions.push_back(pr.output);
    parsed.push_back(std::move(pr));
  }

  report.scores = score(predictions, gold);
  report.confusion = confusion_matrix(predictions, gold);
  write_text(paths.parsed, format_parsed(parsed));
  write_text(paths.score, score_report_json(report));
  return report;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Emotion and opinion-trigger benchmark harness"};
  app.name("eotbench");
  app.require_subcommand(1);
  Options o;

  auto corpus = [&](CLI::App* c, const char* help) {
    c->add_option("--corpus", o.corpus, help)->type_name("FILE");
  };
  auto format = [&](CLI::App* c) {
    c->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"table", "csv"}));
  };
  auto runs_dir = [&](CLI::App* c) {
    c->add_option("--runs-dir", o.runs_dir, "Directory holding runs")->capture_default_str();
  };

  auto* sample = app.add_subcommand("sample", "Draw a stratified review sample from raw corpora");
  corpus(sample, "Corpus file, one source per file (repeatable)");
  sample->add_option("--plan", o.plan, "Sampling plan file")->type_name("FILE");
  sample->add_option("--seed", o.seed, "Override the plan's seed");
  sample->add_option("--out", o.out, "Sample output file")->type_name("FILE");
  sample->add_option("--manifest", o.manifest, "Manifest path (default: <out>.manifest.json)")->type_name("FILE");

  auto* aggregate = app.add_subcommand("aggregate", "Majority-aggregate three annotations per review into gold");
  aggregate->add_option("--annotations", o.annotations, "Annotation file (repeatable)")->type_name("FILE");
  corpus(aggregate, "Reviews the annotations refer to (repeatable)");
  aggregate->add_option("--out", o.out, "Gold output file")->type_name("FILE");

  auto* agreement = app.add_subcommand("agreement", "Inter-annotator agreement per domain");
  agreement->add_option("--annotations", o.annotations, "Annotation file (repeatable)")->type_name("FILE");
  corpus(agreement, "Reviews the annotations refer to (repeatable)");
  format(agreement);
  agreement->add_option("--out", o.out, "Write the table here instead of stdout")->type_name("FILE");

  auto* stats = app.add_subcommand("stats", "Gold-set statistics per domain and emotion");
  stats->add_option("--gold", o.gold, "Gold file")->type_name("FILE");
  corpus(stats, "Reviews the gold refers to (repeatable)");
  format(stats);
  stats->add_option("--out", o.out, "Write the table here instead of stdout")->type_name("FILE");

  auto* run = app.add_subcommand("run", "Send every review to a provider and record responses");
  corpus(run, "Sample to run (repeatable; optional with --resume)");
  run->add_option("--strategy", o.strategy, "zs, zs-cot or eot-detect");
  run->add_option("--profile", o.profile, "Provider profile FILE[:NAME]");
  run->add_option("--config", o.config, "Inference config file")->type_name("FILE");
  run->add_option("--run-id", o.run_ids, "Run id (default: generated)");
  run->add_option("--seed", o.seed, "Seed recorded in the run manifest");
  run->add_flag("--resume", o.resume, "Continue an existing run, skipping reviews already Ok");
  runs_dir(run);

  auto* score = app.add_subcommand("score", "Score a recorded run against gold (no provider calls)");
  score->add_option("--run-id", o.run_ids, "Run to score");
  score->add_option("--gold", o.gold, "Gold file")->type_name("FILE");
  format(score);
  score->add_option("--out", o.out, "Write the report here instead of stdout")->type_name("FILE");
  runs_dir(score);

  auto* report = app.add_subcommand("report", "Compare scored runs in one table");
  report->add_option("--run-id", o.run_ids, "Scored run (repeatable)");
  format(report);
  report->add_option("--out", o.out, "Write the table here instead of stdout")->type_name("FILE");
  runs_dir(report);

  auto* prompt = app.add_subcommand("prompt", "Print the rendered prompt for one review");
  prompt->add_option("--strategy", o.strategy, "zs, zs-cot or eot-detect");
  corpus(prompt, "Reviews (repeatable)");
  prompt->add_option("--review-id", o.review_id, "Review to render (default: the first)");
  prompt->add_option("--out", o.out, "Write here instead of stdout")->type_name("FILE");

  auto* serve = app.add_subcommand("serve-mock", "Serve a local mock chat-completion endpoint");
  corpus(serve, "Reviews (repeatable)");
  serve->add_option("--gold", o.gold, "Echo each review's gold annotation")->type_name("FILE");
  serve->add_option("--responses", o.responses, "Scripted replies, {\"review_id\",\"content\"[,\"status\"]} per line")
      ->type_name("FILE");
  serve->add_option("--host", o.host, "Bind address")->capture_default_str();
  serve->add_option("--port", o.port, "Port (0 picks a free one)")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*sample) return cmd_sample(o, out, err);
    if (*aggregate) return cmd_aggregate(o, out, err);
    if (*agreement) return cmd_agreement(o, out, err);
    if (*stats) return cmd_stats(o, out, err);
    if (*run) return cmd_run(o, out, err);
    if (*score) return cmd_score(o, out, err);
    if (*report) return cmd_report(o, out, err);
    if (*prompt) return cmd_prompt(o, out, err);
    if (*serve) return cmd_serve_mock(o, out, err);
  } catch (const Error& e) {
    err << "eotbench: " << e.what() << "\n";
    return exit_code(classify(e.code()));
  } catch (const fs::filesystem_error& e) {
    err << "eotbench: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "eotbench: internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace eot::cli
