#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "eot/annotation.hpp"
#include "eot/corpus.hpp"
#include "eot/extraction.hpp"
#include "eot/metrics.hpp"
#include "eot/text.hpp"

namespace {

const std::string kReview =
    "Non slip, great arch support. Amazing color and I love them! The laces fray a bit after a month, "
    "which is annoying, but customer service replaced them quickly and I trust this brand now.";

std::vector<std::string> random_tokens(eot::SplitMix64& rng, std::size_t n) {
  std::vector<std::string> out(n);
  for (auto& t : out) t = std::string(1, static_cast<char>('a' + rng.below(8)));
  return out;
}

void BM_RougeL(benchmark::State& state) {
  eot::SplitMix64 rng(1);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_tokens(rng, n);
  const auto b = random_tokens(rng, n);
  for (auto _ : state) benchmark::DoNotOptimize(eot::rougeL(a, b));
}
BENCHMARK(BM_RougeL)->Arg(8)->Arg(32)->Arg(128);

void BM_Tokenize(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(eot::tokenize(kReview));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * kReview.size()));
}
BENCHMARK(BM_Tokenize);

void BM_ParseOutput(benchmark::State& state) {
  const eot::Review review{"r", kReview, eot::Domain::kClothing, std::nullopt, "item"};
  const std::string raw =
      "Let me look at the tone first.\n```json\n"
      R"({"emotions": [{"emotion": "Joy", "triggers": ["great arch support", "I love them"]},
                       {"emotion": "Anger", "triggers": ["which is  annoying"]},
                       {"emotion": "Trust", "triggers": ["I trust this brand now", "not in the review"]}]})"
      "\n```";
  for (auto _ : state) benchmark::DoNotOptimize(eot::parse_output(raw, review));
}
BENCHMARK(BM_ParseOutput);

void BM_AggregateGold(benchmark::State& state) {
  const eot::Review review{"r", kReview, eot::Domain::kClothing, std::nullopt, "item"};
  auto output = [&](std::vector<std::pair<eot::Emotion, std::vector<std::string>>> pairs) {
    eot::EotOutput out{"r", {}};
    for (auto& [e, texts] : pairs) {
      eot::EmotionTriggers et{e, {}};
      for (const auto& t : texts) et.triggers.push_back(*eot::locate_span(kReview, t));
      out.pairs.push_back(std::move(et));
    }
    return out;
  };
  const std::vector<eot::AnnotationRecord> recs{
      {"r", "a1", output({{eot::Emotion::kJoy, {"great arch support", "I love them"}}})},
      {"r", "a2", output({{eot::Emotion::kJoy, {"arch support", "Amazing color"}}, {eot::Emotion::kAnger, {"annoying"}}})},
      {"r", "a3", output({{eot::Emotion::kJoy, {"Non slip, great arch support"}}, {eot::Emotion::kTrust, {"I trust this brand"}}})}};
  for (auto _ : state) benchmark::DoNotOptimize(eot::aggregate_gold(recs));
}
BENCHMARK(BM_AggregateGold);

}  // namespace

BENCHMARK_MAIN();
