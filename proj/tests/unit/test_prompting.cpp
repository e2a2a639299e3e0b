#include <doctest.h>

#include "eot/corpus.hpp"
#include "eot/error.hpp"
#include "eot/prompting.hpp"
#include "support.hpp"

using namespace eot;

namespace {

Review prompt_review() { return load_reviews(test::data_dir() / "prompt_review.jsonl").front(); }

std::string rendered(Strategy s) { return format_messages(render_messages(build_prompt(s, prompt_review()))); }

std::size_t count(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("strategy names") {
  for (Strategy s : {Strategy::kZeroShot, Strategy::kZeroShotCoT, Strategy::kEotDetect})
    CHECK(parse_strategy(to_string(s)) == s);
  CHECK(parse_strategy("zs-cot") == Strategy::kZeroShotCoT);
  CHECK_FALSE(parse_strategy("few-shot"));
  CHECK(prompt_version() == "eot-prompts/v1");
}

TEST_CASE("message layout per strategy") {
  const auto r = prompt_review();
  const auto zs = render_messages(build_prompt(Strategy::kZeroShot, r));
  REQUIRE(zs.size() == 1);
  CHECK(zs[0].role == "user");
  const auto eot = render_messages(build_prompt(Strategy::kEotDetect, r));
  REQUIRE(eot.size() == 2);
  CHECK(eot[0].role == "system");
  CHECK(eot[1].content.find(r.text) != std::string::npos);
}

TEST_CASE("EOT-DETECT has five steps and the four self-check names") {
  const auto spec = build_prompt(Strategy::kEotDetect, prompt_review());
  REQUIRE(spec.instructions.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) CHECK(spec.instructions[i].rfind("I" + std::to_string(i + 1) + ".", 0) == 0);
  const std::string text = rendered(Strategy::kEotDetect);
  for (auto name : kSelfCheckConditions) CHECK(count(text, std::string(name)) >= 1);
  CHECK(spec.instructions[4].find("Opinion Trigger Verifiability") != std::string::npos);
}

TEST_CASE("step-by-step directive appears only in ZS-CoT") {
  CHECK(count(rendered(Strategy::kZeroShotCoT), "think step-by-step") == 1);
  CHECK(count(rendered(Strategy::kZeroShot), "step-by-step") == 0);
  CHECK(count(rendered(Strategy::kEotDetect), "step-by-step") == 0);
}

TEST_CASE("every strategy embeds the review and the output contract once") {
  for (Strategy s : {Strategy::kZeroShot, Strategy::kZeroShotCoT, Strategy::kEotDetect}) {
    const std::string text = rendered(s);
    CHECK(count(text, prompt_review().text) == 1);
    CHECK(count(text, "\"emotions\"") >= 1);
  }
}

TEST_CASE("inference config parsing") {
  const auto c = parse_config("temperature = 0\ntop_p = 1\nmax_tokens = 64\n");
  CHECK(c.temperature == 0.0);
  CHECK(c.top_p == 1.0);
  CHECK(c.top_k == 25);
  CHECK(c.max_tokens == 64);
  CHECK(parse_config(format_config(c)) == c);
  CHECK(default_config() == InferenceConfig{0.2, 0.95, 25, 2500, 1});
  CHECK_THROWS_AS(parse_config("top_p = 0\n"), Error);
  CHECK_THROWS_AS(parse_config("seed = 3\n"), Error);
}
