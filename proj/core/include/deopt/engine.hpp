#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "deopt/eval.hpp"
#include "deopt/fact_store.hpp"
#include "deopt/program.hpp"

namespace deopt {

/// Faults that can be switched on in the embedded engine. Each one only
/// changes the outcome of programs where several rules interact.
enum class BugId : std::uint8_t {
  SeminaiveDelta,     // sibling-rule facts never enter the shared delta
  MagicNegZero,       // demand-filtered comparisons use IEEE numeric order
  SubsumeUnderMagic,  // subsumption is skipped once the demand rewrite fired
  InlineDropLiteral,  // inlining loses the last literal of the inlined body
};

std::string_view bug_name(BugId id);
std::optional<BugId> parse_bug(std::string_view name);
const std::vector<BugId>& all_bugs();

struct OptConfig {
  bool enable_magic = false;
  bool enable_inline = false;
  bool enable_subsumption = false;
  std::set<BugId> injected_bugs;

  bool has_bug(BugId id) const { return injected_bugs.count(id) != 0; }
  // An injected fault switches on the pass it lives in.
  bool magic_active() const {
    return enable_magic || has_bug(BugId::MagicNegZero) || has_bug(BugId::SubsumeUnderMagic);
  }
  bool inline_active() const { return enable_inline || has_bug(BugId::InlineDropLiteral); }

  friend bool operator==(const OptConfig&, const OptConfig&) = default;
};

/// The eight combinations of the three enable flags, without bugs.
std::vector<OptConfig> all_flag_combinations();

struct EvalLimits {
  std::size_t max_tuples_per_relation = 50000;
  // Candidate bindings enumerated over the whole evaluation.
  std::uint64_t max_bindings = 20'000'000;
};

enum class EngineErrorKind : std::uint8_t { Unstratifiable, Semantic, ResourceLimit, InvalidProgram };

struct EngineError {
  EngineErrorKind kind = EngineErrorKind::InvalidProgram;
  std::optional<SemanticErrorKind> semantic;
  std::string message;

  /// Catalog code: unstratifiable, resource_limit, invalid_program, or the
  /// semantic error code (div_zero, ...).
  std::string code() const;
};

class EvalResult {
 public:
  static EvalResult success(FactStore f) { return EvalResult(std::move(f)); }
  static EvalResult failure(EngineError e) { return EvalResult(std::move(e)); }

  bool ok() const { return std::holds_alternative<FactStore>(v_); }
  const FactStore& facts() const { return std::get<FactStore>(v_); }
  FactStore& facts() { return std::get<FactStore>(v_); }
  const EngineError& error() const { return std::get<EngineError>(v_); }

 private:
  explicit EvalResult(FactStore f) : v_(std::move(f)) {}
  explicit EvalResult(EngineError e) : v_(std::move(e)) {}
  std::variant<FactStore, EngineError> v_;
};

struct EvalStats {
  bool magic_fired = false;
  std::size_t inlined_relations = 0;
  std::size_t rounds = 0;
  std::uint64_t bindings = 0;
};

/// Textbook naive evaluation: every rule of a stratum is re-run over the full
/// relations until nothing changes. Ignores all optimization settings.
EvalResult evaluate_naive(const Program& program, const FactStore& edb, const EvalLimits& limits = {});

/// Semi-naive evaluation with the optional rewrites of `opt`. The result holds
/// every declared relation of the input program; when a rewrite is enabled,
/// only output relations are guaranteed to match evaluate_naive.
EvalResult evaluate(const Program& program, const FactStore& edb, const OptConfig& opt,
                    const EvalLimits& limits = {}, EvalStats* stats = nullptr);

/// Demand-driven restriction of non-recursive intermediate relations. Leaves
/// the program unchanged when no relation qualifies. `mark_range_scans` tags
/// var-vs-constant comparisons inside restricted rules.
struct MagicResult {
  Program program;
  bool fired = false;
  std::vector<std::string> restricted;
};
MagicResult magic_rewrite(const Program& program);

/// Replaces every use of a non-recursive, single-rule, non-input, non-output
/// relation by the body of its rule.
struct InlineResult {
  Program program;
  std::vector<std::string> inlined;
};
InlineResult inline_rewrite(const Program& program, bool drop_last_literal = false);

/// Removes each tuple dominated by some other tuple of `facts`.
TupleSet apply_subsumption(const TupleSet& facts, const SubsumptionRule& sub);
/// All rules judged against the same input set; a tuple goes if any rule
/// removes it.
TupleSet apply_subsumptions(const TupleSet& facts, const std::vector<const SubsumptionRule*>& subs);

/// Relation-level strata: a relation is placed strictly above the relations it
/// negates and the subsumed relations it reads, and at or above the others.
/// Returns the cycle description when no such layering exists.
std::variant<std::map<std::string, int>, std::string> relation_levels(const Program& program);

/// Prefix used for relations introduced by rewrites.
inline constexpr std::string_view kInternalPrefix = "__";
bool is_internal_relation(const std::string& rel);

}  // namespace deopt
