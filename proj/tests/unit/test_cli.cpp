#include <doctest.h>

#include <json.hpp>

#include "commands.hpp"
#include "eot/annotation.hpp"
#include "eot/corpus.hpp"
#include "eot/ledger.hpp"
#include "eot/mock_provider.hpp"
#include "eot/report.hpp"
#include "support.hpp"

using namespace eot;
using test::run_cli;

namespace {

std::vector<Review> toy_corpus(int items, int per_item) {
  std::vector<Review> out;
  for (int i = 0; i < items; ++i)
    for (int j = 0; j < per_item; ++j)
      out.push_back(test::make_review("i" + std::to_string(i) + "r" + std::to_string(j),
                                      "This lotion number " + std::to_string(j) +
                                          " is soft and smells lovely after a long day outside.",
                                      Domain::kBeauty, "item" + std::to_string(i),
                                      1'500'000'000 + j * 40'000'000LL));
  return out;
}

struct Workspace {
  test::TempDir dir{"eot-cli"};
  std::vector<Review> reviews;
  std::vector<GoldRecord> gold;

  Workspace() {
    reviews = {test::make_review("a", "The battery life is great but the screen is awful."),
               test::make_review("b", "Arrived on time. Works as described."),
               test::make_review("c", "I love the color and trust this brand.")};
    gold = {test::make_gold(reviews[0], {{Emotion::kJoy, {"battery life is great"}}, {Emotion::kAnger, {"screen is awful"}}}),
            test::make_gold(reviews[1], {{Emotion::kNeutral, {}}}),
            test::make_gold(reviews[2], {{Emotion::kJoy, {"I love the color"}}, {Emotion::kTrust, {"trust this brand"}}})};
    write_reviews(dir / "sample.jsonl", reviews);
    write_gold(dir / "gold.jsonl", gold);
  }

  std::string path(std::string_view name) const { return (dir / name).string(); }

  std::string profile(const std::string& base_url, const std::string& auth = "EOT_CLI_TEST_KEY") const {
    test::write_text(dir / "profile.ini", "[mock]\nbase_url = " + base_url + "\nmodel_id = mock-model\nauth_env_var = " +
                                              auth + "\nmax_concurrency = 2\nmax_attempts = 2\nbackoff_base_ms = 1\n");
    return path("profile.ini");
  }

  MockProvider::Handler echo() const {
    std::vector<std::pair<std::string, MockReply>> replies;
    for (std::size_t i = 0; i < reviews.size(); ++i) {
      MockReply r;
      r.content = gold_echo_response(gold[i]);
      replies.emplace_back(reviews[i].text, r);
    }
    return scripted_handler(std::move(replies));
  }
};

}  // namespace

TEST_CASE("usage errors exit 2") {
  CHECK(run_cli({}).code == cli::kExitUsage);
  CHECK(run_cli({"frobnicate"}).code == cli::kExitUsage);
  CHECK(run_cli({"--help"}).code == cli::kExitOk);
  test::TempDir dir;
  const auto r = run_cli({"prompt", "--strategy", "few-shot", "--corpus", (dir / "x.jsonl").string()});
  CHECK(r.code == cli::kExitUsage);
  CHECK(r.err.find("unknown strategy") != std::string::npos);
}

TEST_CASE("sample is deterministic and writes a manifest") {
  test::TempDir dir;
  write_reviews(dir / "raw.jsonl", toy_corpus(5, 10));
  test::write_text(dir / "plan.ini", "seed = 7\nitems_per_group = 2\nreviews_per_item = 3\n");
  auto args = [&](const std::string& out) {
    return std::vector<std::string>{"sample", "--corpus", (dir / "raw.jsonl").string(), "--plan",
                                    (dir / "plan.ini").string(), "--out", (dir / out).string()};
  };
  REQUIRE(run_cli(args("s1.jsonl")).code == 0);
  REQUIRE(run_cli(args("s2.jsonl")).code == 0);
  CHECK(load_reviews(dir / "s1.jsonl").size() == 6);
  CHECK(test::read_text(dir / "s1.jsonl") == test::read_text(dir / "s2.jsonl"));
  CHECK(test::read_text(dir / "s1.jsonl.manifest.json") == test::read_text(dir / "s2.jsonl.manifest.json"));

  auto reseeded = args("s3.jsonl");
  reseeded.insert(reseeded.end(), {"--seed", "8"});
  REQUIRE(run_cli(reseeded).code == 0);
  CHECK(test::read_text(dir / "s1.jsonl") != test::read_text(dir / "s3.jsonl"));

  test::write_text(dir / "plan.ini", "seed = 7\nitems_per_group = 2\nreviews_per_item = 11\n");
  const auto r = run_cli(args("s4.jsonl"));
  CHECK(r.code == cli::kExitData);
  CHECK(r.err.find("InsufficientReviews") != std::string::npos);
}

TEST_CASE("aggregate and stats") {
  Workspace w;
  std::string lines;
  for (const char* who : {"a1", "a2", "a3"}) {
    const bool joy = std::string(who) != "a3";
    nlohmann::json doc{{"review_id", "a"}, {"annotator_id", who}, {"emotions", nlohmann::json::array()}};
    if (joy) doc["emotions"].push_back({{"emotion", "Joy"}, {"triggers", {"battery life is great"}}});
    else doc["emotions"].push_back({{"emotion", "Anger"}, {"triggers", {"screen is awful"}}});
    lines += doc.dump() + "\n";
  }
  test::write_text(w.dir / "ann.jsonl", lines);
  auto r = run_cli({"aggregate", "--annotations", w.path("ann.jsonl"), "--corpus", w.path("sample.jsonl"), "--out",
                    w.path("agg.jsonl")});
  REQUIRE(r.code == 0);
  const auto gold = load_gold(w.dir / "agg.jsonl", index_reviews(w.reviews));
  REQUIRE(gold.size() == 1);
  REQUIRE(gold[0].output.pairs.size() == 1);
  CHECK(gold[0].output.pairs[0].emotion == Emotion::kJoy);

  // Two annotators are not enough.
  test::write_text(w.dir / "ann2.jsonl", lines.substr(0, lines.rfind('\n', lines.size() - 2) + 1));
  r = run_cli({"aggregate", "--annotations", w.path("ann2.jsonl"), "--corpus", w.path("sample.jsonl"), "--out",
               w.path("agg2.jsonl")});
  CHECK(r.code == cli::kExitData);
  CHECK(r.err.find("WrongAnnotatorCount") != std::string::npos);

  r = run_cli({"aggregate", "--annotations", w.path("ann.jsonl"), "--out", w.path("agg3.jsonl")});
  CHECK(r.code == cli::kExitUsage);

  r = run_cli({"stats", "--gold", w.path("gold.jsonl"), "--corpus", w.path("sample.jsonl")});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("Beauty") != std::string::npos);
  r = run_cli({"stats", "--gold", w.path("gold.jsonl"), "--corpus", w.path("sample.jsonl"), "--format", "csv"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find(',') != std::string::npos);
  r = run_cli({"agreement", "--annotations", w.path("ann.jsonl"), "--corpus", w.path("sample.jsonl")});
  CHECK(r.code == 0);
}

TEST_CASE("run, score and report against a gold-echo mock") {
  Workspace w;
  MockProvider mock(w.echo());
  const auto profile = w.profile(mock.base_url());
  const std::string runs = w.path("runs");

  {
    const auto r = run_cli({"run", "--corpus", w.path("sample.jsonl"), "--strategy", "eot-detect", "--profile", profile,
                            "--run-id", "echo1", "--runs-dir", runs});
    CHECK(r.code == cli::kExitProvider);
    CHECK(r.err.find("AuthMissing") != std::string::npos);
    CHECK(mock.request_count() == 0);
  }

  test::EnvGuard key("EOT_CLI_TEST_KEY", "k-123");
  auto r = run_cli({"run", "--corpus", w.path("sample.jsonl"), "--strategy", "eot-detect", "--profile", profile,
                    "--run-id", "echo1", "--runs-dir", runs});
  REQUIRE(r.code == 0);
  CHECK(r.out == "echo1\n");
  CHECK(mock.request_count() == 3);
  CHECK(mock.requests()[0].authorization == "Bearer k-123");

  r = run_cli({"run", "--corpus", w.path("sample.jsonl"), "--strategy", "eot-detect", "--profile", profile, "--run-id",
               "echo1", "--runs-dir", runs});
  CHECK(r.code == cli::kExitData);
  CHECK(r.err.find("RunExists") != std::string::npos);

  r = run_cli({"run", "--strategy", "eot-detect", "--profile", profile, "--run-id", "echo1", "--runs-dir", runs,
               "--resume"});
  REQUIRE(r.code == 0);
  CHECK(r.err.find("3 already done") != std::string::npos);
  CHECK(mock.request_count() == 3);

  r = run_cli({"run", "--strategy", "zs", "--profile", profile, "--run-id", "echo1", "--runs-dir", runs, "--resume"});
  CHECK(r.code != 0);

  r = run_cli({"score", "--run-id", "echo1", "--gold", w.path("gold.jsonl"), "--runs-dir", runs, "--format", "csv"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("mock-model") != std::string::npos);
  const auto score = nlohmann::json::parse(test::read_text(RunPaths::of(runs, "echo1").score));
  CHECK(score["run_id"] == "echo1");
  CHECK(std::filesystem::exists(RunPaths::of(runs, "echo1").parsed));

  r = run_cli({"score", "--run-id", "echo1", "--gold", w.path("gold.jsonl"), "--runs-dir", runs});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("1.00") != std::string::npos);

  r = run_cli({"report", "--run-id", "echo1", "--runs-dir", runs});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("mock-model") != std::string::npos);
  CHECK(r.out.find("eot-detect") != std::string::npos);
}

TEST_CASE("scoring a run that does not exist exits 3") {
  Workspace w;
  const auto r = run_cli({"score", "--run-id", "nope", "--gold", w.path("gold.jsonl"), "--runs-dir", w.path("runs")});
  CHECK(r.code == cli::kExitData);
  CHECK(r.err.find("UnknownRun") != std::string::npos);
  CHECK(run_cli({"report", "--run-id", "nope", "--runs-dir", w.path("runs")}).code == cli::kExitData);
}

TEST_CASE("a run with a failed request exits 4 and still scores") {
  Workspace w;
  std::vector<std::pair<std::string, MockReply>> replies;
  for (std::size_t i = 0; i < w.reviews.size(); ++i) {
    MockReply reply;
    if (i == 1) reply.status = 400;
    else reply.content = gold_echo_response(w.gold[i]);
    replies.emplace_back(w.reviews[i].text, reply);
  }
  MockProvider mock(scripted_handler(replies));
  const auto profile = w.profile(mock.base_url(), "");
  const std::string runs = w.path("runs");
  auto r = run_cli({"run", "--corpus", w.path("sample.jsonl"), "--strategy", "zs", "--profile", profile, "--run-id",
                    "partial", "--runs-dir", runs});
  CHECK(r.code == cli::kExitProvider);
  CHECK(r.err.find("1 failed") != std::string::npos);

  const ScoreReport report = cli::score_run(runs, "partial", w.path("gold.jsonl"));
  CHECK(report.parse.failed_requests == 1);
  CHECK(report.scores.emotion.precision == 1.0);
  CHECK(report.scores.emotion.recall == doctest::Approx(4.0 / 5.0));
}
