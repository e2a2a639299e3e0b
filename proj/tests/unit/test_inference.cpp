#include <doctest.h>

#include <atomic>
#include <deque>
#include <fstream>
#include <mutex>

#include <json.hpp>

#include "eot/error.hpp"
#include "eot/inference.hpp"
#include "eot/ledger.hpp"
#include "eot/mock_provider.hpp"
#include "support.hpp"

using namespace eot;
using namespace std::chrono_literals;

namespace {

class FakeTransport final : public HttpTransport {
 public:
  explicit FakeTransport(std::deque<HttpResponse> script) : script_(std::move(script)) {}

  HttpResponse post(const HttpRequest& request) override {
    std::lock_guard lock(mutex_);
    requests.push_back(request);
    if (script_.empty()) return ok("default");
    HttpResponse r = script_.front();
    if (script_.size() > 1) script_.pop_front();
    return r;
  }

  static HttpResponse ok(const std::string& text) {
    HttpResponse r;
    r.status = 200;
    r.body = nlohmann::json{{"choices", {{{"message", {{"role", "assistant"}, {"content", text}}}}}}}.dump();
    return r;
  }
  static HttpResponse status(int code) {
    HttpResponse r;
    r.status = code;
    r.body = "{\"error\":\"x\"}";
    return r;
  }

  std::vector<HttpRequest> requests;

 private:
  std::mutex mutex_;
  std::deque<HttpResponse> script_;
};

ProviderProfile profile(const std::string& base_url = "http://127.0.0.1:1/v1") {
  ProviderProfile p;
  p.name = "test";
  p.base_url = base_url;
  p.model_id = "m";
  p.auth_env_var = "";
  p.retry.base_delay = 1ms;
  p.retry.max_delay = 4ms;
  return p;
}

struct Harness {
  std::shared_ptr<FakeTransport> transport;
  std::vector<std::chrono::milliseconds> sleeps;
  std::vector<std::string> logs;
  CompletionContext context;

  explicit Harness(std::deque<HttpResponse> script) : transport(std::make_shared<FakeTransport>(std::move(script))) {
    context.transport = transport;
    context.sleep = [this](std::chrono::milliseconds d) { sleeps.push_back(d); };
    context.log = [this](std::string_view m) { logs.emplace_back(m); };
    context.getenv = [](const std::string& name) -> std::optional<std::string> {
      if (name == "SET_KEY") return "secret";
      return std::nullopt;
    };
    context.jitter_seed = 42;
  }
};

const std::vector<ChatMessage> kMessages{{"user", "hello"}};

std::vector<Review> reviews(std::size_t n) {
  std::vector<Review> out;
  for (std::size_t i = 0; i < n; ++i)
    out.push_back(test::make_review("r" + std::to_string(i), "Review number " + std::to_string(i) + " is lovely."));
  return out;
}

}  // namespace

TEST_CASE("backoff ceiling grows geometrically and is capped") {
  RetryPolicy p;
  CHECK(p.ceiling(1) == 1000ms);
  CHECK(p.ceiling(2) == 2000ms);
  CHECK(p.ceiling(4) == 8000ms);
  CHECK(p.ceiling(10) == 60000ms);
  CHECK(p.max_attempts == 5);
}

TEST_CASE("profile files") {
  const auto ps = parse_profiles(
      "[a]\nbase_url = https://x.example/v1/\nmodel_id = m1\nauth_env_var = K\n"
      "supported_params = temperature, top_p, top_k, max_tokens\nmax_concurrency = 3\ntimeout_seconds = 1.5\n"
      "[b]\nbase_url = http://localhost:8000/v1\nmodel = m2\n");
  REQUIRE(ps.size() == 2);
  CHECK(ps[0].base_url == "https://x.example/v1");
  CHECK(ps[0].supported_params.contains("top_k"));
  CHECK(ps[0].timeout == 1500ms);
  CHECK(ps[1].max_concurrency == 1);
  CHECK(select_profile(ps, "b").model_id == "m2");
  CHECK_THROWS_AS(select_profile(ps, ""), Error);
  CHECK_THROWS_AS(select_profile(ps, "c"), Error);
  CHECK(parse_profiles(format_profile(ps[0])).front().supported_params == ps[0].supported_params);

  const auto single = parse_profiles("name = solo\nbase_url = http://h/v1\nmodel_id = m\n");
  CHECK(select_profile(single, "").name == "solo");

  CHECK_THROWS_AS(parse_profiles("[a]\nbase_url = ftp://x\nmodel_id = m\n"), Error);
  CHECK_THROWS_AS(parse_profiles("[a]\nbase_url = http://x\nmodel_id = m\nmax_concurrency = 0\n"), Error);
  CHECK_THROWS_AS(parse_profiles("[a]\nbase_url = http://x\nmodel_id = m\ntimeout_seconds = 0\n"), Error);
  CHECK_THROWS_AS(parse_profiles("[a]\nbase_url = http://x\nmodel_id = m\nsupported_params = seed\n"), Error);
  CHECK_THROWS_AS(parse_profiles("[a]\nbase_url = http://x\nmodel_id = m\ncolor = red\n"), Error);
}

TEST_CASE("request body filters sampling parameters") {
  auto p = profile();
  InferenceConfig c;
  auto body = build_request_body(p, kMessages, c);
  auto doc = nlohmann::json::parse(body.json);
  CHECK(doc["model"] == "m");
  CHECK(doc["messages"][0]["content"] == "hello");
  CHECK(doc["temperature"] == doctest::Approx(0.2));
  CHECK(doc["max_tokens"] == 2500);
  CHECK_FALSE(doc.contains("top_k"));
  CHECK(body.dropped_params == std::vector<std::string>{"top_k", "n"});
  p.supported_params.insert("top_k");
  doc = nlohmann::json::parse(build_request_body(p, kMessages, c).json);
  CHECK(doc["top_k"] == 25);
}

TEST_CASE("completion body parsing") {
  CHECK(parse_completion_text(FakeTransport::ok("hi").body) == "hi");
  CHECK(parse_completion_text(R"({"choices":[{"message":{"content":null}}]})").empty());
  CHECK_THROWS_AS(parse_completion_text("{}"), Error);
  CHECK_THROWS_AS(parse_completion_text("not json"), Error);
}

TEST_CASE("complete returns the first choice text") {
  Harness h({FakeTransport::ok("fixed text")});
  auto p = profile();
  p.auth_env_var = "SET_KEY";
  const auto r = complete(p, kMessages, InferenceConfig{}, h.context);
  CHECK(r.text == "fixed text");
  CHECK(r.attempts == 1);
  REQUIRE(h.transport->requests.size() == 1);
  const auto& req = h.transport->requests[0];
  CHECK(req.url == "http://127.0.0.1:1/v1/chat/completions");
  bool has_auth = false;
  for (const auto& [k, v] : req.headers) has_auth |= k == "Authorization" && v == "Bearer secret";
  CHECK(has_auth);
}

TEST_CASE("429 twice then 200 succeeds on the third attempt") {
  Harness h({FakeTransport::status(429), FakeTransport::status(429), FakeTransport::ok("done")});
  const auto r = complete(profile(), kMessages, InferenceConfig{}, h.context);
  CHECK(r.text == "done");
  CHECK(r.attempts == 3);
  REQUIRE(h.sleeps.size() == 2);
  CHECK(h.sleeps[0] <= 1ms);
  CHECK(h.sleeps[1] <= 2ms);
}

TEST_CASE("persistent 500 fails after the attempt cap") {
  Harness h({FakeTransport::status(500)});
  auto p = profile();
  p.retry.max_attempts = 3;
  try {
    complete(p, kMessages, InferenceConfig{}, h.context);
    FAIL("expected ProviderError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kProviderError);
    CHECK(e.http_status() == 500);
    CHECK(e.attempts() == 3);
  }
  CHECK(h.transport->requests.size() == 3);
}

TEST_CASE("exhausted 429 is RateLimited, timeouts are Timeout, 4xx is not retried") {
  {
    Harness h({FakeTransport::status(429)});
    CHECK_THROWS_WITH_AS(complete(profile(), kMessages, InferenceConfig{}, h.context), doctest::Contains("RateLimited"),
                         Error);
    CHECK(h.transport->requests.size() == 5);
  }
  {
    HttpResponse t;
    t.transport = TransportStatus::kTimeout;
    Harness h({t});
    CHECK_THROWS_WITH_AS(complete(profile(), kMessages, InferenceConfig{}, h.context), doctest::Contains("Timeout"),
                         Error);
  }
  {
    Harness h({FakeTransport::status(400)});
    CHECK_THROWS_WITH_AS(complete(profile(), kMessages, InferenceConfig{}, h.context),
                         doctest::Contains("ProviderError"), Error);
    CHECK(h.transport->requests.size() == 1);
  }
}

TEST_CASE("Retry-After raises the delay up to the cap") {
  auto limited = FakeTransport::status(429);
  limited.retry_after = std::chrono::seconds(1);
  Harness h({limited, FakeTransport::ok("ok")});
  auto p = profile();
  p.retry.max_delay = 500ms;
  complete(p, kMessages, InferenceConfig{}, h.context);
  REQUIRE(h.sleeps.size() == 1);
  CHECK(h.sleeps[0] == 500ms);
}

TEST_CASE("missing auth fails before any request") {
  Harness h({FakeTransport::ok("x")});
  auto p = profile();
  p.auth_env_var = "UNSET_KEY";
  CHECK_THROWS_WITH_AS(complete(p, kMessages, InferenceConfig{}, h.context), doctest::Contains("AuthMissing"), Error);
  CHECK(h.transport->requests.empty());
}

TEST_CASE("unsupported parameters are logged") {
  Harness h({FakeTransport::ok("x")});
  auto p = profile();
  p.name = "log-once-profile";
  complete(p, kMessages, InferenceConfig{}, h.context);
  complete(p, kMessages, InferenceConfig{}, h.context);
  CHECK(h.logs.size() == 2);  // top_k and n, once each
}

TEST_CASE("ledger entries round trip and torn lines are skipped") {
  test::TempDir dir;
  RunLedgerEntry e{"run", "r1", Strategy::kEotDetect, "v", "{\"emotions\":[]}\n", 12, 2, EntryStatus::kOk, ""};
  CHECK(parse_ledger_entry(format_ledger_entry(e)) == e);
  {
    LedgerWriter w(dir / "l.jsonl");
    w.append(e);
  }
  {
    std::ofstream f(dir / "l.jsonl", std::ios::app);
    f << "{\"format_version\":1,\"run_id\":\"ru";
  }
  auto e2 = e;
  e2.review_id = "r2";
  e2.status = EntryStatus::kFailed;
  e2.error = "boom";
  {
    LedgerWriter w(dir / "l.jsonl");
    w.append(e2);
  }
  const auto contents = read_ledger(dir / "l.jsonl");
  REQUIRE(contents.entries.size() == 2);
  CHECK(contents.entries[1] == e2);
  CHECK(contents.unreadable_lines == 1);
}

TEST_CASE("run manifest round trip and run ids") {
  RunManifest m;
  m.run_id = "abc";
  m.corpus_path = "s.jsonl";
  m.strategy = Strategy::kZeroShotCoT;
  m.profile_name = "p";
  m.model_id = "m";
  m.prompt_version = "v1";
  m.created_at = "2024-01-01T00:00:00Z";
  m.seed = 7;
  CHECK(parse_run_manifest(format_run_manifest(m)) == m);
  CHECK_NOTHROW(validate_run_id(generate_run_id(Strategy::kEotDetect)));
  CHECK_THROWS_AS(validate_run_id("../x"), Error);
  CHECK_THROWS_AS(validate_run_id(""), Error);
}

TEST_CASE("mock provider over HTTP") {
  MockProvider mock([](const MockRequest& req, std::size_t) {
    MockReply r;
    r.content = "echo:" + req.messages.back().content;
    return r;
  });
  auto p = profile(mock.base_url());
  const auto r = complete(p, kMessages, InferenceConfig{}, {});
  CHECK(r.text == "echo:hello");
  CHECK(mock.request_count() == 1);
  CHECK(mock.requests()[0].model == "m");
}

TEST_CASE("real transport reports timeouts") {
  MockProvider mock([](const MockRequest&, std::size_t) {
    MockReply r;
    r.delay = 1500ms;
    r.content = "late";
    return r;
  });
  auto p = profile(mock.base_url());
  p.timeout = 300ms;
  p.retry.max_attempts = 1;
  CHECK_THROWS_WITH_AS(complete(p, kMessages, InferenceConfig{}, {}), doctest::Contains("Timeout"), Error);
}

TEST_CASE("real transport reports connection failures as ProviderError") {
  auto p = profile("http://127.0.0.1:1/v1");
  p.retry.max_attempts = 2;
  CompletionContext ctx;
  ctx.sleep = [](std::chrono::milliseconds) {};
  try {
    complete(p, kMessages, InferenceConfig{}, ctx);
    FAIL("expected failure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kProviderError);
    CHECK(e.http_status() == 0);
    CHECK(e.attempts() == 2);
  }
}

TEST_CASE("run_experiment writes one Ok entry per review") {
  test::TempDir dir;
  MockProvider mock([](const MockRequest&, std::size_t) {
    MockReply r;
    r.content = "{\"emotions\":[]}";
    return r;
  });
  RunOptions o;
  o.runs_dir = dir.path();
  o.run_id = "ten";
  const auto rs = reviews(10);
  const auto summary = run_experiment(rs, Strategy::kZeroShot, profile(mock.base_url()), InferenceConfig{}, o);
  CHECK(summary.ok == 10);
  CHECK_FALSE(summary.partial_failure());
  const auto ledger = read_ledger(RunPaths::of(dir.path(), "ten").ledger);
  CHECK(ledger.entries.size() == 10);
  for (const auto& e : ledger.entries) CHECK(e.status == EntryStatus::kOk);
  const auto manifest = load_run_manifest(dir.path(), "ten");
  CHECK(manifest.strategy == Strategy::kZeroShot);
  CHECK(manifest.prompt_version == prompt_version());

  CHECK_THROWS_WITH_AS(run_experiment(rs, Strategy::kZeroShot, profile(mock.base_url()), InferenceConfig{}, o),
                       doctest::Contains("RunExists"), Error);
  o.run_id = "never-started";
  o.resume = true;
  CHECK_THROWS_WITH_AS(run_experiment(rs, Strategy::kZeroShot, profile(mock.base_url()), InferenceConfig{}, o),
                       doctest::Contains("UnknownRun"), Error);
}

TEST_CASE("resume after an interrupted run adds only the missing entries") {
  test::TempDir dir;
  MockProvider mock([](const MockRequest&, std::size_t) {
    MockReply r;
    r.content = "{\"emotions\":[]}";
    return r;
  });
  RunOptions o;
  o.runs_dir = dir.path();
  o.run_id = "crash";
  const auto rs = reviews(10);
  run_experiment(rs, Strategy::kEotDetect, profile(mock.base_url()), InferenceConfig{}, o);
  // Simulate a crash at 5/10 with a half-written sixth line.
  const auto path = RunPaths::of(dir.path(), "crash").ledger;
  auto lines = test::read_text(path);
  std::size_t cut = 0;
  for (int i = 0; i < 5; ++i) cut = lines.find('\n', cut) + 1;
  test::write_text(path, lines.substr(0, cut) + lines.substr(cut, 40));

  const std::size_t before = mock.request_count();
  o.resume = true;
  const auto summary = run_experiment(rs, Strategy::kEotDetect, profile(mock.base_url()), InferenceConfig{}, o);
  CHECK(summary.skipped == 5);
  CHECK(summary.ok == 5);
  CHECK(mock.request_count() - before == 5);
  const auto ledger = read_ledger(path);
  CHECK(ledger.entries.size() == 10);
  CHECK(latest_entries(ledger.entries).size() == 10);
}

TEST_CASE("a failing review becomes a Failed entry without aborting the run") {
  test::TempDir dir;
  const auto rs = reviews(10);
  const std::string bad = rs[3].text;
  std::atomic<bool> heal{false};
  MockProvider mock([&](const MockRequest& req, std::size_t) {
    MockReply r;
    if (!heal && req.messages.back().content.find(bad) != std::string::npos) {
      r.status = 400;
      return r;
    }
    r.content = "{\"emotions\":[]}";
    return r;
  });
  RunOptions o;
  o.runs_dir = dir.path();
  o.run_id = "partial";
  auto p = profile(mock.base_url());
  auto summary = run_experiment(rs, Strategy::kZeroShot, p, InferenceConfig{}, o);
  CHECK(summary.ok == 9);
  CHECK(summary.failed == 1);
  CHECK(summary.partial_failure());

  heal = true;
  o.resume = true;
  summary = run_experiment(rs, Strategy::kZeroShot, p, InferenceConfig{}, o);
  CHECK(summary.skipped == 9);
  CHECK(summary.ok == 1);
  const auto latest = latest_entries(read_ledger(RunPaths::of(dir.path(), "partial").ledger).entries);
  CHECK(latest.at("r3").status == EntryStatus::kOk);
}

TEST_CASE("concurrency stays within max_concurrency") {
  test::TempDir dir;
  MockProvider mock([](const MockRequest&, std::size_t) {
    MockReply r;
    r.delay = 40ms;
    r.content = "{}";
    return r;
  });
  auto p = profile(mock.base_url());
  p.max_concurrency = 3;
  RunOptions o;
  o.runs_dir = dir.path();
  o.run_id = "bounded";
  const auto summary = run_experiment(reviews(12), Strategy::kZeroShot, p, InferenceConfig{}, o);
  CHECK(summary.ok == 12);
  CHECK(mock.max_in_flight() <= 3);
  CHECK(mock.max_in_flight() >= 2);
}

TEST_CASE("run_experiment checks auth before writing anything") {
  test::TempDir dir;
  MockProvider mock([](const MockRequest&, std::size_t) { return MockReply{}; });
  auto p = profile(mock.base_url());
  p.auth_env_var = "EOT_TEST_DEFINITELY_UNSET";
  RunOptions o;
  o.runs_dir = dir / "runs";
  o.run_id = "noauth";
  CHECK_THROWS_WITH_AS(run_experiment(reviews(2), Strategy::kZeroShot, p, InferenceConfig{}, o),
                       doctest::Contains("AuthMissing"), Error);
  CHECK(mock.request_count() == 0);
  CHECK_FALSE(std::filesystem::exists(dir / "runs"));
}
