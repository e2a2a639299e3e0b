#include "eot/metrics.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <tuple>

#include "eot/error.hpp"
#include "eot/text.hpp"

namespace eot {

double harmonic_f1(double precision, double recall) noexcept {
  if (precision <= 0.0 || recall <= 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

namespace {

double ratio(std::size_t num, std::size_t den) noexcept {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

struct Pair {
  const EotOutput* pred;
  const EotOutput* gold;
};

std::vector<Pair> align(std::span<const EotOutput> pred, std::span<const GoldRecord> gold) {
  std::map<std::string_view, const EotOutput*> by_id;
  for (const auto& g : gold) by_id.emplace(g.review_id, &g.output);
  std::set<std::string_view> seen;
  std::vector<Pair> out;
  out.reserve(pred.size());
  for (const auto& p : pred) {
    if (!seen.insert(p.review_id).second)
      throw Error(ErrorCode::kInvalidArgument, "duplicate prediction for review " + p.review_id);
    auto it = by_id.find(p.review_id);
    if (it == by_id.end()) throw Error(ErrorCode::kMissingGold, "no gold for review " + p.review_id);
    out.push_back({&p, it->second});
  }
  return out;
}

Prf from_counts(std::size_t hits, std::size_t n_pred, std::size_t n_gold) {
  Prf s;
  s.precision = ratio(hits, n_pred);
  s.recall = ratio(hits, n_gold);
  s.f1 = harmonic_f1(s.precision, s.recall);
  return s;
}

struct TokenizedTrigger {
  std::string normalized;
  std::vector<std::string> tokens;
};

std::vector<TokenizedTrigger> tokenized(const EmotionTriggers* pair) {
  std::vector<TokenizedTrigger> out;
  if (!pair) return out;
  for (const auto& t : pair->triggers) out.push_back({normalize_text(t.text()), tokenize(t.text())});
  return out;
}

bool shares_token(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  for (const auto& x : a)
    if (std::find(b.begin(), b.end(), x) != b.end()) return true;
  return false;
}

Prf from_overlap(std::size_t overlap, std::size_t n_pred, std::size_t n_gold) {
  if (n_pred == 0 && n_gold == 0) return {1.0, 1.0, 1.0};
  return from_counts(overlap, n_pred, n_gold);
}

}  // namespace

EmotionScores emotion_prf(std::span<const EotOutput> pred, std::span<const GoldRecord> gold) {
  EmotionScores s;
  for (const auto& [p, g] : align(pred, gold)) {
    const EmotionSet ps = p->emotion_set();
    const EmotionSet gs = g->emotion_set();
    for (std::size_t i = 0; i < 9; ++i) {
      auto& label = s.per_emotion[i];
      if (ps.test(i)) ++label.predicted;
      if (gs.test(i)) ++label.support;
      if (ps.test(i) && gs.test(i)) ++label.hits;
    }
  }
  std::size_t active = 0;
  for (auto& label : s.per_emotion) {
    label.prf = from_counts(label.hits, label.predicted, label.support);
    s.hits += label.hits;
    s.n_pred += label.predicted;
    s.n_gold += label.support;
    if (label.predicted + label.support > 0) {
      ++active;
      s.macro.precision += label.prf.precision;
      s.macro.recall += label.prf.recall;
      s.macro.f1 += label.prf.f1;
    }
  }
  if (active > 0) {
    s.macro.precision /= static_cast<double>(active);
    s.macro.recall /= static_cast<double>(active);
    s.macro.f1 /= static_cast<double>(active);
  }
  const Prf micro = from_counts(s.hits, s.n_pred, s.n_gold);
  s.precision = micro.precision;
  s.recall = micro.recall;
  s.f1 = micro.f1;
  return s;
}

TriggerMatch trigger_em_pm(std::span<const EotOutput> pred, std::span<const GoldRecord> gold) {
  TriggerMatch m;
  auto& c = m.counts;
  for (const auto& [p, g] : align(pred, gold)) {
    for (const auto& pair : g->pairs) c.n_gold += pair.triggers.size();
    for (const auto& pair : p->pairs) {
      const auto gold_triggers = tokenized(g->find(pair.emotion));
      for (const auto& t : tokenized(&pair)) {
        ++c.n_pred;
        const bool exact = std::any_of(gold_triggers.begin(), gold_triggers.end(),
                                       [&](const auto& gt) { return gt.normalized == t.normalized; });
        if (exact) {
          ++c.n_em;
          continue;
        }
        const bool partial = std::any_of(gold_triggers.begin(), gold_triggers.end(),
                                         [&](const auto& gt) { return shares_token(t.tokens, gt.tokens); });
        if (partial) ++c.n_pm;
        else ++c.n_nomatch;
      }
    }
  }
  m.exact_match = ratio(c.n_em, c.n_pred);
  m.partial_match = ratio(c.n_pm, c.n_pred);
  return m;
}

Prf rouge1(std::span<const std::string> pred_tokens, std::span<const std::string> gold_tokens) {
  std::map<std::string_view, std::size_t> gold_bag;
  for (const auto& t : gold_tokens) ++gold_bag[t];
  std::size_t overlap = 0;
  for (const auto& t : pred_tokens) {
    auto it = gold_bag.find(t);
    if (it != gold_bag.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  return from_overlap(overlap, pred_tokens.size(), gold_tokens.size());
}

Prf rougeL(std::span<const std::string> pred_tokens, std::span<const std::string> gold_tokens) {
  const std::size_t n = pred_tokens.size();
  const std::size_t m = gold_tokens.size();
  std::vector<std::size_t> prev(m + 1, 0), cur(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      cur[j] = pred_tokens[i - 1] == gold_tokens[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return from_overlap(prev[m], n, m);
}

RougeAverages align_and_average_rouge(std::span<const EotOutput> pred, std::span<const GoldRecord> gold) {
  double sum1 = 0.0, sumL = 0.0;
  std::size_t n_gold = 0, n_pred = 0;
  for (const auto& [p, g] : align(pred, gold)) {
    for (const auto& pair : p->pairs) n_pred += pair.triggers.size();
    for (const auto& gold_pair : g->pairs) {
      const auto gt = tokenized(&gold_pair);
      const auto pt = tokenized(p->find(gold_pair.emotion));
      n_gold += gt.size();
      struct Candidate {
        double l;
        double one;
        std::size_t gi;
        std::size_t pi;
      };
      std::vector<Candidate> candidates;
      for (std::size_t gi = 0; gi < gt.size(); ++gi)
        for (std::size_t pi = 0; pi < pt.size(); ++pi)
          candidates.push_back({rougeL(pt[pi].tokens, gt[gi].tokens).f1,
                                rouge1(pt[pi].tokens, gt[gi].tokens).f1, gi, pi});
      std::stable_sort(candidates.begin(), candidates.end(),
                       [](const Candidate& a, const Candidate& b) { return a.l > b.l; });
      std::vector<bool> gold_used(gt.size(), false), pred_used(pt.size(), false);
      for (const auto& c : candidates) {
        if (gold_used[c.gi] || pred_used[c.pi]) continue;
        gold_used[c.gi] = pred_used[c.pi] = true;
        sumL += c.l;
        sum1 += c.one;
      }
    }
  }
  if (n_gold == 0) {
    const double v = n_pred == 0 ? 1.0 : 0.0;
    return {v, v};
  }
  return {sum1 / static_cast<double>(n_gold), sumL / static_cast<double>(n_gold)};
}

ConfusionMatrix confusion_matrix(std::span<const EotOutput> pred, std::span<const GoldRecord> gold) {
  ConfusionMatrix cm;
  for (const auto& [p, g] : align(pred, gold)) {
    const EmotionSet ps = p->emotion_set();
    const EmotionSet gs = g->emotion_set();
    const EmotionSet spurious = ps & ~gs;
    const EmotionSet missed = gs & ~ps;
    for (std::size_t i = 0; i < 9; ++i)
      if (ps.test(i) && gs.test(i)) cm.cells[i][i] += 1.0;
    if (spurious.any() && missed.any()) {
      const double w = 1.0 / static_cast<double>(spurious.count() * missed.count());
      for (std::size_t i = 0; i < 9; ++i)
        for (std::size_t j = 0; j < 9; ++j)
          if (spurious.test(i) && missed.test(j)) cm.cells[i][j] += w;
    } else {
      for (std::size_t i = 0; i < 9; ++i) {
        if (spurious.test(i)) cm.unpaired_predicted[i] += 1.0;
        if (missed.test(i)) cm.unpaired_gold[i] += 1.0;
      }
    }
  }
  return cm;
}

Scores score(std::span<const EotOutput> pred, std::span<const GoldRecord> gold) {
  Scores s;
  s.emotion = emotion_prf(pred, gold);
  const TriggerMatch m = trigger_em_pm(pred, gold);
  const RougeAverages r = align_and_average_rouge(pred, gold);
  s.trigger.exact_match = m.exact_match;
  s.trigger.partial_match = m.partial_match;
  s.trigger.counts = m.counts;
  s.trigger.rouge1 = r.rouge1;
  s.trigger.rougeL = r.rougeL;
  return s;
}

}  // namespace eot
