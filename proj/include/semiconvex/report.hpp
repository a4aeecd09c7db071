#pragma once

#include "semiconvex/catalog.hpp"
#include "semiconvex/hypersurface.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace semiconvex {

inline constexpr int kReportSchema = 1;

const char* version();

/// Everything needed to reproduce a run. Serialized verbatim into the report.
struct RunConfig {
  std::string entry;
  /// Optional user catalog file searched before the builtin entries.
  std::string catalog_file;
  /// Inline entry in catalog format; used instead of `entry` when present.
  json inline_entry;
  /// Operations to run; empty runs every expectation of the entry.
  std::vector<std::string> ops;
  std::uint64_t seed = 1;
  double tol_scale = 1.0;
  std::optional<CausalFilter> variant;
  int workers = 0;
  /// Replaces the "expect" object of every selected task.
  json expect_override;
  /// {"op": ..., "param": ..., "values": [...], plus op config}: runs the op once per value.
  json sweep;
  std::string out;
  std::string csv_dir;

  json to_json() const;
  /// Throws ParseError.
  static RunConfig from_json(const json& j);
};

struct RunReport {
  json document;
  /// 0 expectations met, 1 discrepancy, 2 inconclusive, 3 config or IO error.
  int exit_status = 0;
};

/// Runs the configured operations and builds the report document. Config and
/// IO problems are reported with exit status 3 rather than thrown.
RunReport run_audit(const RunConfig& config);

/// run_audit plus writing the report to config.out (stdout when empty is left to the caller).
RunReport run_and_write(const RunConfig& config);

/// Removes the "timing" key recursively.
json strip_timing(json report);

/// One row per builtin (and optional user) entry; family filter matches exactly.
std::string list_catalog(const std::string& family = "", const std::string& catalog_file = "");

}  // namespace semiconvex
