#include "eot/corpus.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "eot/error.hpp"
#include "eot/text.hpp"
#include "json_records.hpp"
#include "kv.hpp"

namespace eot {

namespace {

__extension__ using Uint128 = unsigned __int128;

std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

bool is_blank(std::string_view line) {
  return line.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

StratifiedSample stratified_sample_for(std::string_view item_id,
                                       std::span<const Review> reviews,
                                       const SamplingPlan& plan) {
  const std::size_t m = plan.reviews_per_item;
  if (reviews.size() < m) {
    throw Error(ErrorCode::kInsufficientReviews,
                "item " + std::string(item_id) + " has " + std::to_string(reviews.size()) +
                    " eligible reviews, need " + std::to_string(m));
  }
  // Chronological stratum order, unknown last.
  auto stratum_less = [](const std::string& a, const std::string& b) {
    const bool ua = a == "unknown";
    const bool ub = b == "unknown";
    if (ua != ub) return ub;
    return a < b;
  };
  std::map<std::string, std::vector<std::size_t>, decltype(stratum_less)> strata(stratum_less);
  for (std::size_t i = 0; i < reviews.size(); ++i) {
    strata[stratum_key(reviews[i], plan.strata_granularity)].push_back(i);
  }
  std::vector<std::size_t> sizes;
  for (const auto& [key, members] : strata) sizes.push_back(members.size());
  const auto allocation = largest_remainder(sizes, m);

  StratifiedSample out;
  std::size_t s = 0;
  for (const auto& [key, members] : strata) {
    const std::size_t want = allocation[s++];
    const auto seed = derive_seed(plan.seed, {item_id, key});
    for (std::size_t pick : srswor_indices(members.size(), want, seed)) {
      out.reviews.push_back(reviews[members[pick]]);
    }
    out.strata.push_back(StratumAllocation{key, members.size(), want});
  }
  return out;
}

}  // namespace

std::string_view to_string(StrataGranularity g) noexcept {
  return g == StrataGranularity::kYear ? "year" : "quarter";
}

void SamplingPlan::validate() const {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidArgument, "sampling plan: " + what);
  };
  if (min_tokens == 0) fail("min_tokens must be positive");
  if (min_tokens > max_tokens) fail("min_tokens exceeds max_tokens");
  if (items_per_group == 0) fail("items_per_group must be at least 1");
  if (reviews_per_item == 0) fail("reviews_per_item must be at least 1");
}

SamplingPlan parse_plan(std::string_view text, std::string_view source) {
  SamplingPlan plan;
  const auto sections = detail::parse_kv(text, source);
  if (sections.size() != 1) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(source) + ": sampling plans have no sections");
  }
  for (const auto& entry : sections.front().entries) {
    if (entry.key == "seed") {
      plan.seed = detail::parse_uint(entry, source);
    } else if (entry.key == "items_per_group") {
      plan.items_per_group = detail::parse_uint(entry, source);
    } else if (entry.key == "reviews_per_item") {
      plan.reviews_per_item = detail::parse_uint(entry, source);
    } else if (entry.key == "min_tokens") {
      plan.min_tokens = detail::parse_uint(entry, source);
    } else if (entry.key == "max_tokens") {
      plan.max_tokens = detail::parse_uint(entry, source);
    } else if (entry.key == "strata_granularity") {
      if (entry.value == "year") {
        plan.strata_granularity = StrataGranularity::kYear;
      } else if (entry.value == "quarter") {
        plan.strata_granularity = StrataGranularity::kQuarter;
      } else {
        throw Error(ErrorCode::kInvalidArgument,
                    std::string(source) + ": strata_granularity must be year or quarter");
      }
    } else {
      throw Error(ErrorCode::kInvalidArgument,
                  std::string(source) + ":" + std::to_string(entry.line) +
                      ": unknown key '" + entry.key + "'");
    }
  }
  plan.validate();
  return plan;
}

SamplingPlan load_plan(const std::filesystem::path& path) {
  return parse_plan(detail::read_file(path), path.string());
}

std::string format_plan(const SamplingPlan& plan) {
  std::ostringstream out;
  out << "seed = " << plan.seed << '\n'
      << "items_per_group = " << plan.items_per_group << '\n'
      << "reviews_per_item = " << plan.reviews_per_item << '\n'
      << "min_tokens = " << plan.min_tokens << '\n'
      << "max_tokens = " << plan.max_tokens << '\n'
      << "strata_granularity = " << to_string(plan.strata_granularity) << '\n';
  return out.str();
}

CorpusFile parse_corpus(std::span<const std::string> lines, std::string_view source_name) {
  CorpusFile corpus;
  bool have_source = false;
  std::set<std::string, std::less<>> seen;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    if (is_blank(lines[i])) continue;
    try {
      Review r = detail::review_from_json(detail::parse_json(lines[i], "review"));
      if (!have_source) {
        corpus.source = source_of(r.domain);
        have_source = true;
      } else if (source_of(r.domain) != corpus.source) {
        corpus.rejections.push_back(
            {line_no, "domain " + std::string(to_string(r.domain)) +
                          " does not belong to source " +
                          std::string(to_string(corpus.source))});
        continue;
      }
      if (!seen.insert(r.review_id).second) {
        corpus.rejections.push_back({line_no, "duplicate review_id " + r.review_id});
        continue;
      }
      corpus.records.push_back(std::move(r));
    } catch (const Error& e) {
      corpus.rejections.push_back({line_no, e.what()});
    }
  }
  if (corpus.records.empty()) {
    throw Error(ErrorCode::kEmptyCorpus,
                std::string(source_name) + " has no well-formed records (" +
                    std::to_string(corpus.rejections.size()) + " rejected)");
  }
  return corpus;
}

CorpusFile load_corpus(const std::filesystem::path& path) {
  const auto lines = detail::read_lines(path);
  return parse_corpus(lines, path.string());
}

std::vector<Review> load_reviews(const std::filesystem::path& path) {
  std::vector<Review> reviews;
  std::set<std::string, std::less<>> seen;
  const auto lines = detail::read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (is_blank(lines[i])) continue;
    try {
      Review r = detail::review_from_json(detail::parse_json(lines[i], "review"));
      if (!seen.insert(r.review_id).second) {
        throw Error(ErrorCode::kMalformedRecord, "duplicate review_id " + r.review_id);
      }
      reviews.push_back(std::move(r));
    } catch (const Error& e) {
      throw Error(ErrorCode::kMalformedRecord,
                  path.string() + ":" + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return reviews;
}

std::string format_reviews(std::span<const Review> reviews) {
  std::string out;
  for (const auto& r : reviews) {
    out += detail::dump_line(detail::review_to_json(r));
    out += '\n';
  }
  return out;
}

void write_reviews(const std::filesystem::path& path, std::span<const Review> reviews) {
  detail::write_file(path, format_reviews(reviews));
}

std::vector<Review> filter_by_length(std::span<const Review> reviews,
                                     const SamplingPlan& plan) {
  std::vector<Review> kept;
  for (const auto& r : reviews) {
    const std::size_t n = tokenize(r.text).size();
    if (n >= plan.min_tokens && n <= plan.max_tokens) kept.push_back(r);
  }
  return kept;
}

std::uint64_t SplitMix64::next() noexcept {
  state_ += 0x9E3779B97F4A7C15ULL;
  return mix64(state_);
}

std::uint64_t SplitMix64::below(std::uint64_t bound) noexcept {
  // Lemire's multiply-shift with rejection of the biased low range.
  Uint128 product = static_cast<Uint128>(next()) * bound;
  auto low = static_cast<std::uint64_t>(product);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      product = static_cast<Uint128>(next()) * bound;
      low = static_cast<std::uint64_t>(product);
    }
  }
  return static_cast<std::uint64_t>(product >> 64);
}

std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::string_view> keys) {
  std::uint64_t h = mix64(seed ^ 0x6A09E667F3BCC908ULL);
  for (std::string_view key : keys) {
    h = mix64(h ^ fnv1a64(key));
    h = mix64(h + key.size());
  }
  return h;
}

std::vector<std::size_t> srswor_indices(std::size_t population_size, std::size_t n,
                                        std::uint64_t seed) {
  if (n > population_size) {
    throw Error(ErrorCode::kSampleTooLarge,
                "cannot draw " + std::to_string(n) + " from a population of " +
                    std::to_string(population_size));
  }
  std::vector<std::size_t> pool(population_size);
  for (std::size_t i = 0; i < population_size; ++i) pool[i] = i;
  SplitMix64 rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(population_size - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(n);
  return pool;
}

std::string stratum_key(const Review& review, StrataGranularity granularity) {
  if (!review.timestamp) return "unknown";
  using namespace std::chrono;
  const sys_seconds t{seconds{*review.timestamp}};
  const year_month_day ymd{floor<days>(t)};
  const int year = static_cast<int>(ymd.year());
  char buf[32];
  if (granularity == StrataGranularity::kYear) {
    std::snprintf(buf, sizeof buf, "%04d", year);
  } else {
    const unsigned quarter = (static_cast<unsigned>(ymd.month()) - 1) / 3 + 1;
    std::snprintf(buf, sizeof buf, "%04d-Q%u", year, quarter);
  }
  return buf;
}

std::vector<std::size_t> largest_remainder(std::span<const std::size_t> sizes, std::size_t m) {
  std::size_t total = 0;
  for (auto s : sizes) total += s;
  if (m > total) {
    throw Error(ErrorCode::kInvalidArgument,
                "cannot allocate " + std::to_string(m) + " slots over " +
                    std::to_string(total) + " units");
  }
  std::vector<std::size_t> alloc(sizes.size(), 0);
  if (total == 0) return alloc;
  // Quota m*s/total as integer floor plus remainder numerator.
  std::vector<std::size_t> remainder(sizes.size(), 0);
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const auto scaled = static_cast<Uint128>(m) * sizes[i];
    alloc[i] = static_cast<std::size_t>(scaled / total);
    remainder[i] = static_cast<std::size_t>(scaled % total);
    assigned += alloc[i];
  }
  std::vector<std::size_t> order(sizes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return remainder[a] > remainder[b];
  });
  for (std::size_t k = 0; assigned < m; ++k, ++assigned) ++alloc[order[k]];
  return alloc;
}

StratifiedSample stratified_review_sample(std::span<const Review> reviews_of_item,
                                          const SamplingPlan& plan) {
  const std::string item_id = reviews_of_item.empty() ? std::string() : reviews_of_item.front().item_id;
  return stratified_sample_for(item_id, reviews_of_item, plan);
}

double DomainSample::sampling_fraction() const noexcept {
  return population_items == 0 ? 0.0
                               : static_cast<double>(items.size()) /
                                     static_cast<double>(population_items);
}

CorpusSample sample_corpus(std::span<const Review> reviews, const SamplingPlan& plan) {
  plan.validate();
  struct ItemGroup {
    std::string id;
    std::vector<Review> reviews;
  };
  std::array<std::vector<ItemGroup>, kDomainCount> groups;
  std::array<std::map<std::string, std::size_t, std::less<>>, kDomainCount> lookup;
  for (const auto& r : reviews) {
    const auto d = index_of(r.domain);
    auto [it, inserted] = lookup[d].emplace(r.item_id, groups[d].size());
    if (inserted) groups[d].push_back(ItemGroup{r.item_id, {}});
    groups[d][it->second].reviews.push_back(r);
  }

  CorpusSample out;
  for (Domain domain : kAllDomains) {
    const auto& items = groups[index_of(domain)];
    if (items.empty()) continue;
    DomainSample ds;
    ds.domain = domain;
    ds.population_items = items.size();
    std::vector<std::size_t> picks;
    try {
      picks = srswor_indices(items.size(), plan.items_per_group,
                             derive_seed(plan.seed, {"items", to_string(domain)}));
    } catch (const Error& e) {
      throw Error(e.code(), "domain " + std::string(to_string(domain)) + ": " + e.what());
    }
    for (std::size_t pick : picks) {
      const auto& item = items[pick];
      const auto eligible = filter_by_length(item.reviews, plan);
      auto drawn = stratified_sample_for(item.id, eligible, plan);
      ds.items.push_back(ItemSample{item.id, item.reviews.size(), eligible.size(),
                                    std::move(drawn.strata)});
      for (auto& r : drawn.reviews) out.reviews.push_back(std::move(r));
    }
    out.domains.push_back(std::move(ds));
  }
  return out;
}

std::string format_sample_manifest(const CorpusSample& sample, const SamplingPlan& plan,
                                   std::span<const std::string> corpus_paths) {
  detail::ojson m;
  m["format_version"] = detail::kFormatVersion;
  m["kind"] = "sample_manifest";
  m["seed"] = plan.seed;
  m["plan"] = {{"items_per_group", plan.items_per_group},
               {"reviews_per_item", plan.reviews_per_item},
               {"min_tokens", plan.min_tokens},
               {"max_tokens", plan.max_tokens},
               {"strata_granularity", std::string(to_string(plan.strata_granularity))}};
  m["corpus_paths"] = detail::ojson::array();
  for (const auto& p : corpus_paths) m["corpus_paths"].push_back(p);
  m["total_reviews"] = sample.reviews.size();
  m["domains"] = detail::ojson::array();
  for (const auto& ds : sample.domains) {
    detail::ojson d;
    d["domain"] = std::string(to_string(ds.domain));
    d["population_items"] = ds.population_items;
    d["sampled_items"] = ds.items.size();
    d["sampling_fraction"] = ds.sampling_fraction();
    d["inclusion_probability"] = ds.sampling_fraction();
    d["items"] = detail::ojson::array();
    for (const auto& item : ds.items) {
      detail::ojson it;
      it["item_id"] = item.item_id;
      it["reviews_before_filter"] = item.reviews_before_filter;
      it["reviews_after_filter"] = item.reviews_after_filter;
      it["review_sampling_fraction"] =
          item.reviews_after_filter == 0
              ? 0.0
              : static_cast<double>(plan.reviews_per_item) /
                    static_cast<double>(item.reviews_after_filter);
      it["strata"] = detail::ojson::array();
      for (const auto& s : item.strata) {
        it["strata"].push_back({{"key", s.key}, {"available", s.available}, {"selected", s.selected}});
      }
      d["items"].push_back(std::move(it));
    }
    m["domains"].push_back(std::move(d));
  }
  return m.dump(2) + "\n";
}

}  // namespace eot
