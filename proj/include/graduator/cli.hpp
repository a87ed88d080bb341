// graduator/cli.hpp - reports and the command-line driver
#pragma once

#include "graduator/analysis.hpp"
#include "graduator/ast.hpp"
#include "graduator/cfg.hpp"
#include "graduator/runtime.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace graduator {

inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

struct Summary
{
  std::size_t static_warnings = 0;
  std::size_t checks = 0;
  std::size_t boundaries = 0;
  std::size_t dereference_sites = 0;
  std::size_t eliminated = 0;
  /// Whole percent; empty when there are no dereference sites.
  std::optional<int> eliminated_pct;
};

struct Report
{
  std::string source;
  Mode mode = Mode::Gradual;
  std::vector<Warning> warnings;
  std::vector<CheckSite> checks;
  Summary summary;
};

/// Analyzes a well-formed program.
Report build_report(const ProgramCfg & cfg, Mode mode, std::string source);

std::string report_json(const Report & r);
std::string report_text(const Report & r);

/// JSON for a run-time Error: the check-site fields plus the offending value.
std::string error_json(const ProgramCfg & cfg, const Error & e);

/// Every annotation replaced by `?`.
Program erase_all_annotations(const Program & p);

struct PolicyResult
{
  std::string policy;
  std::size_t warnings = 0;
  std::size_t checks = 0;
};

/// gradual, nonnull-default and nullable-default, in that order.
std::vector<PolicyResult> compare_policies(const Program & p);

/// Entry point of the `graduator` executable. `args` excludes the program name.
int run_cli(const std::vector<std::string> & args, std::ostream & out, std::ostream & err);

}  // namespace graduator
