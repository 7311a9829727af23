#pragma once

#include "wbplan/pipeline.hpp"

#include <filesystem>
#include <map>
#include <string>

namespace wbplan {

/// One planning query as read from a config document.
struct RunConfig {
  std::filesystem::path map_path;
  std::filesystem::path shape_path;
  Pose2 start;
  Pose2 goal;
  PlanConfig plan{};
  std::filesystem::path out_dir{"out"};
  bool render{false};
  bool record_timings{true};  ///< false writes zero timings so metrics are byte-stable
};

/// Parses an INI-style document. Relative file paths resolve against `base_dir`.
/// Throws ParseError on syntax errors, unknown keys or bad values.
RunConfig parse_run_config(const std::string& document, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

/// `key = value` lines in a fixed order.
std::string metrics_document(const PlanResult& result, bool record_timings = true);
/// The same metrics as a JSON object.
std::string metrics_json(const PlanResult& result, bool record_timings = true);
/// Human-readable table with Time (s) and Length (m) rows split by stage.
std::string metrics_table(const PlanResult& result, bool record_timings = true);

/// Parses `key = value` lines; blank lines and `#` comments are skipped.
std::map<std::string, std::string> parse_metrics(const std::string& document);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace wbplan
