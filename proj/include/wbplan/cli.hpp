#pragma once

#include "wbplan/io.hpp"

#include <iosfwd>

namespace wbplan {

enum ExitCode : int { kExitSuccess = 0, kExitParse = 2, kExitPlanFailure = 3, kExitInternal = 4 };

/// Plans one query and writes metrics, table, trajectory and (optionally) SVGs under out_dir.
PlanResult run(const RunConfig& config);

struct BenchSummary {
  int runs{0};
  int successes{0};
  std::string document;  ///< aggregate `key = value` metrics
};

/// Runs every `*.ini` in `config_dir` (sorted by name) `reps` times with seeds base_seed + r.
/// A negative base seed keeps each config's own seed as the base.
BenchSummary bench(const std::filesystem::path& config_dir, int reps, long base_seed,
                   const std::filesystem::path& out_dir, bool render, bool record_timings);

/// Entry point of the command-line tool; returns a process exit code.
int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace wbplan
