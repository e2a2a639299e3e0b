#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "eot/error.hpp"
#include "eot/report.hpp"

namespace eot::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitProvider = 4;  // also: run finished with Failed entries
inline constexpr int kExitInternal = 1;

int exit_code(ErrorClass error_class) noexcept;

/// Entry point shared by main() and the tests.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Scores a run from its persisted files only: parses each latest ledger
/// entry, writes parsed.jsonl and score.json into the run directory.
/// Throws Error(kUnknownRun) or Error(kMissingGold).
ScoreReport score_run(const std::filesystem::path& runs_dir, const std::string& run_id,
                      const std::filesystem::path& gold_path);

}  // namespace eot::cli
