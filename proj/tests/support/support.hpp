#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "eot/annotation.hpp"
#include "eot/types.hpp"

namespace eot::test {

std::filesystem::path data_dir();
std::filesystem::path golden_dir();

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(std::string_view tag = "eot");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(std::string_view name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

Review make_review(std::string id, std::string text, Domain domain = Domain::kBeauty,
                   std::string item_id = "item", std::optional<std::int64_t> timestamp = std::nullopt);

/// Builds an output from (emotion, trigger texts); triggers are located
/// leftmost and must exist.
EotOutput make_output(const Review& review,
                      std::vector<std::pair<Emotion, std::vector<std::string>>> pairs);

GoldRecord make_gold(const Review& review,
                     std::vector<std::pair<Emotion, std::vector<std::string>>> pairs);

void write_text(const std::filesystem::path& path, std::string_view content);
std::string read_text(const std::filesystem::path& path);

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

CliResult run_cli(std::vector<std::string> args);

/// Sets an environment variable for the lifetime of the guard.
class EnvGuard {
 public:
  EnvGuard(std::string name, const std::string& value);
  ~EnvGuard();
  EnvGuard(const EnvGuard&) = delete;
  EnvGuard& operator=(const EnvGuard&) = delete;

 private:
  std::string name_;
  std::optional<std::string> previous_;
};

}  // namespace eot::test
