#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "deopt/adapters.hpp"
#include "deopt/program.hpp"

namespace deopt {

enum class BugKind : std::uint8_t { Logic, SemanticErrorUnexpected, Crash, Hang };

std::string_view bug_kind_name(BugKind k);  // logic, semantic_error_unexpected, crash, hang
std::optional<BugKind> parse_bug_kind(std::string_view s);

struct BugReport {
  BugKind kind = BugKind::Logic;
  std::uint64_t seed = 0;
  std::uint64_t iteration = 0;
  RuleId rule_index = 0;              // id of the rule whose addition exposed the problem
  std::string phase = "optimized";    // "optimized" or "reference"
  std::string engine;                 // JSON description of the engine configuration
  std::string output_rel;
  Program program;                    // the optimized program, EDB included
  std::map<RuleId, TupleSet> stable;  // per-rule reference results
  TupleSet oracle;
  std::optional<FactStore> optimized;
  FactDiff diff;  // only_in_a: expected but missing, only_in_b: unexpected
  std::string stdout_text;
  std::string stderr_text;
  std::string detail;
  std::optional<Program> reduced;
  bool reduction_failed = false;
};

/// Compares an optimized run with the oracle. Returns the kind of problem, if any, with the
/// diff and engine output filled in; catalogued semantic errors are not bugs.
std::optional<BugReport> check_discrepancy(const TupleSet& oracle, const RunOutcome& optimized,
                                           const std::string& output_rel);

/// Bug report serialization. The report directory holds report.json, the
/// readable program text and, for external engines, the rendered artifacts.
std::string report_to_json_text(const BugReport& r);
std::optional<BugReport> report_from_json_text(const std::string& text, std::string* error = nullptr);

}  // namespace deopt
