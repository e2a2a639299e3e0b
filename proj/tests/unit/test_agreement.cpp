#include <doctest.h>

#include "eot/agreement.hpp"
#include "eot/error.hpp"
#include "support.hpp"

using namespace eot;

TEST_CASE("cohen kappa on binary counts") {
  BinaryCounts c{4, 1, 1, 4};
  CHECK(cohen_kappa(c) == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(cohen_kappa(BinaryCounts{3, 0, 0, 7}) == 1.0);
  CHECK(cohen_kappa(BinaryCounts{}) == 1.0);
  CHECK(cohen_kappa(BinaryCounts{0, 0, 0, 5}) == 1.0);
  // Opposite constant raters: chance agreement 0, observed 0.
  CHECK(cohen_kappa(BinaryCounts{0, 5, 0, 0}) == 0.0);
}

TEST_CASE("cohen kappa over emotion sets expands to nine binary items per review") {
  std::vector<EmotionSet> a(2), b(2);
  a[0].set(index_of(Emotion::kJoy));
  b[0].set(index_of(Emotion::kJoy));
  a[1].set(index_of(Emotion::kAnger));
  b[1].set(index_of(Emotion::kAnger));
  CHECK(cohen_kappa(a, b) == 1.0);
  b[1].set(index_of(Emotion::kDisgust));
  // 18 items: both_yes 2, b_only 1, both_no 15.
  const double po = 17.0 / 18, pa = 2.0 / 18, pb = 3.0 / 18;
  const double pe = pa * pb + (1 - pa) * (1 - pb);
  CHECK(cohen_kappa(a, b) == doctest::Approx((po - pe) / (1 - pe)).epsilon(1e-12));
}

TEST_CASE("fleiss kappa") {
  CHECK(fleiss_kappa({{3, 0}, {1, 2}}) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(fleiss_kappa({{3, 0}, {0, 3}, {3, 0}}) == 1.0);
  CHECK(fleiss_kappa({{3, 0}, {3, 0}}) == 1.0);
  CHECK_THROWS_AS(fleiss_kappa({{3, 0}, {1, 1}}), Error);
  CHECK_THROWS_AS(fleiss_kappa({{1, 0}}), Error);
}

TEST_CASE("token coverage items for very happy vs happy") {
  const auto r = test::make_review("r", "I am very happy today");
  const auto a = test::make_output(r, {{Emotion::kJoy, {"very happy"}}});
  const auto b = test::make_output(r, {{Emotion::kJoy, {"happy"}}});
  const auto c = trigger_token_counts(a, b, r);
  CHECK(c.both_yes == 1);
  CHECK(c.a_only == 1);
  CHECK(c.b_only == 0);
  CHECK(c.both_no == 3);
  CHECK(cohen_kappa(c) == doctest::Approx((0.8 - 0.56) / 0.44).epsilon(1e-12));
}

TEST_CASE("token kappa with no triggers on either side is vacuous agreement") {
  const auto r = test::make_review("r", "It is a lamp");
  const ReviewIndex index = index_reviews(std::vector<Review>{r});
  std::vector<AnnotationRecord> a{{"r", "a1", neutral_output("r")}};
  std::vector<AnnotationRecord> b{{"r", "a2", neutral_output("r")}};
  CHECK(trigger_token_kappa(a, b, index) == 1.0);
}

TEST_CASE("agreement report layout") {
  std::vector<Review> reviews{test::make_review("r1", "Love it. Hate the box.", Domain::kBeauty),
                              test::make_review("r2", "Quiet room, rude staff.", Domain::kTripAdvisor)};
  const ReviewIndex index = index_reviews(reviews);
  std::vector<AnnotationRecord> recs;
  for (const char* ann : {"a1", "a2", "a3"}) {
    recs.push_back({"r1", ann, test::make_output(reviews[0], {{Emotion::kJoy, {"Love it"}}})});
    recs.push_back({"r2", ann, test::make_output(reviews[1], {{Emotion::kAnger, {"rude staff"}}})});
  }
  const auto report = compute_agreement(recs, index);
  CHECK(report.annotators == std::vector<std::string>{"a1", "a2", "a3"});
  REQUIRE(report.pairs.size() == 3);
  CHECK(report.pairs[1] == std::pair<std::size_t, std::size_t>{1, 2});
  CHECK(report.pairs[2] == std::pair<std::size_t, std::size_t>{0, 2});
  REQUIRE(report.emotion_rows.size() == kDomainCount + 1);
  CHECK(report.emotion_rows.back().label == "Overall Average");
  CHECK(report.emotion_rows[0].average == 1.0);
  CHECK_FALSE(report.emotion_rows[1].average);  // no Clothing reviews
  CHECK(report.trigger_rows.back().average == 1.0);
  const auto table = format_agreement(report, TableFormat::kTable);
  CHECK(table.find("Overall Average") != std::string::npos);
  const auto csv = format_agreement(report, TableFormat::kCsv);
  CHECK(csv.find("Beauty") != std::string::npos);
}

TEST_CASE("gold statistics arithmetic") {
  const auto r = test::make_review("r", "one two three. four five six seven eight", Domain::kHome);
  const ReviewIndex index = index_reviews(std::vector<Review>{r});
  std::vector<GoldRecord> gold{test::make_gold(r, {{Emotion::kJoy, {"one two three", "four five six seven eight"}}})};
  const auto stats = gold_statistics(gold, index);
  const auto& joy = stats.domains[index_of(Domain::kHome)].emotions[index_of(Emotion::kJoy)];
  CHECK(joy.count == 1);
  CHECK(joy.total_triggers == 2);
  CHECK(joy.avg_triggers == doctest::Approx(2.0));
  CHECK(joy.avg_trigger_tokens == doctest::Approx(4.0));
  CHECK(joy.percentage == doctest::Approx(100.0));

  const auto empty = gold_statistics(std::vector<GoldRecord>{}, index);
  CHECK(empty.overall.reviews == 0);
  CHECK(empty.overall.emotions[0].count == 0);
  CHECK(empty.overall.emotions[0].avg_triggers == 0.0);
}
