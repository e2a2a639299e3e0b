#include "support.hpp"

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

#include "commands.hpp"

namespace eot::test {

namespace fs = std::filesystem;

fs::path data_dir() { return EOT_TEST_DATA_DIR; }
fs::path golden_dir() { return EOT_GOLDEN_DIR; }

TempDir::TempDir(std::string_view tag) {
  static std::atomic<unsigned> counter{0};
  std::random_device rd;
  for (int attempt = 0; attempt < 100; ++attempt) {
    path_ = fs::temp_directory_path() / (std::string(tag) + "-" + std::to_string(::getpid()) + "-" +
                                         std::to_string(counter++) + "-" + std::to_string(rd() % 100000));
    if (fs::create_directories(path_)) return;
  }
  throw std::runtime_error("cannot create temp dir");
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

Review make_review(std::string id, std::string text, Domain domain, std::string item_id,
                   std::optional<std::int64_t> timestamp) {
  Review r;
  r.review_id = std::move(id);
  r.text = std::move(text);
  r.domain = domain;
  r.item_id = std::move(item_id);
  r.timestamp = timestamp;
  return r;
}

EotOutput make_output(const Review& review, std::vector<std::pair<Emotion, std::vector<std::string>>> pairs) {
  EotOutput out{review.review_id, {}};
  for (auto& [emotion, texts] : pairs) {
    EmotionTriggers et{emotion, {}};
    for (const auto& t : texts) {
      auto span = locate_span(review.text, t);
      if (!span) throw std::runtime_error("trigger not in review: " + t);
      et.triggers.push_back(*span);
    }
    out.pairs.push_back(std::move(et));
  }
  return out;
}

GoldRecord make_gold(const Review& review, std::vector<std::pair<Emotion, std::vector<std::string>>> pairs) {
  GoldRecord g;
  g.review_id = review.review_id;
  g.output = make_output(review, std::move(pairs));
  return g;
}

void write_text(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << content;
  if (!f) throw std::runtime_error("cannot write " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

CliResult run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "eotbench");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliResult r;
  r.code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

EnvGuard::EnvGuard(std::string name, const std::string& value) : name_(std::move(name)) {
  if (const char* prev = std::getenv(name_.c_str())) previous_ = prev;
  ::setenv(name_.c_str(), value.c_str(), 1);
}

EnvGuard::~EnvGuard() {
  if (previous_) ::setenv(name_.c_str(), previous_->c_str(), 1);
  else ::unsetenv(name_.c_str());
}

}  // namespace eot::test
