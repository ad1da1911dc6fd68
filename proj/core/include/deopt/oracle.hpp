#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "deopt/adapters.hpp"
#include "deopt/program.hpp"
#include "deopt/stratify.hpp"

namespace deopt {

/// Skeleton input facts plus the latest reference result of every rule,
/// keyed by rule id (the facts of the rule's head relation).
struct StableFacts {
  FactStore edb;
  std::map<RuleId, TupleSet> per_rule;

  /// Input view of `rel` for a reference program made of `excluded` rules:
  /// EDB facts plus the results of every other rule with head `rel`.
  TupleSet view_for(const Program& program, const std::string& rel, const std::set<RuleId>& excluded) const;

  friend bool operator==(const StableFacts&, const StableFacts&) = default;
};

struct OracleConfig {
  std::size_t max_iter = 100;
};

enum class OracleErrorKind : std::uint8_t {
  ExpectedError,    // a catalogued semantic error: the new rule is discarded
  EngineFailure,    // crash, hang, parse failure or an unknown error
  MaxIterExceeded,  // positive recursion without a fixpoint
};

struct OracleError {
  OracleErrorKind kind = OracleErrorKind::EngineFailure;
  std::vector<RuleId> rules;  // the reference program that failed
  RunOutcome outcome;
  std::string message;
};

struct OracleStats {
  std::size_t reference_runs = 0;
  double reference_time_s = 0.0;
  std::size_t recursion_rounds = 0;  // rounds of the last positive recursion handled
};

/// Single-rule (or single-SCC) program over `rules`: declarations of every
/// relation it mentions, inputs taken from `stable`, all head relations as
/// outputs, and the subsumption rules of those heads.
Program build_reference_program(const Program& program, const std::vector<RuleId>& rules,
                                const StableFacts& stable);

/// Runs the reference program of `rules` and returns the facts of its head
/// relations. The caller stores them into `stable`.
std::variant<FactStore, OracleError> gen_prog_and_exec(const Program& program, const std::vector<RuleId>& rules,
                                                       const StableFacts& stable, EngineAdapter& engine,
                                                       OracleStats* stats = nullptr);

/// Evaluates a recursive component and updates stable.per_rule for its
/// members. Negative internal edges: one combined program. Otherwise rules are
/// re-run in ascending id order until a whole round changes nothing.
std::optional<OracleError> handle_recursion(const Program& program, const CondensedNode& node,
                                            StableFacts& stable, EngineAdapter& engine, const OracleConfig& cfg,
                                            OracleStats* stats = nullptr);

/// Facts of `output_rel`: EDB facts plus every defining rule's latest result.
/// When several sources meet in a subsumed relation, the union is passed
/// through the engine once more so that cross-source dominance applies.
std::variant<TupleSet, OracleError> get_facts(const Program& program, const StableFacts& stable,
                                              const std::string& output_rel, EngineAdapter& engine,
                                              OracleStats* stats = nullptr);

/// Recomputes the results of every rule in `subgraph` stratum by stratum
/// (results of those rules are cleared first) and returns the oracle for
/// `output_rel`.
std::variant<TupleSet, OracleError> test_oracle_gen(const Program& program, const PrecedenceGraph& subgraph,
                                                    StableFacts& stable, const std::string& output_rel,
                                                    EngineAdapter& engine, const OracleConfig& cfg,
                                                    OracleStats* stats = nullptr);

/// Oracle for the whole program from empty caches.
std::variant<TupleSet, OracleError> full_oracle(const Program& program, EngineAdapter& engine,
                                                const OracleConfig& cfg, StableFacts* stable_out = nullptr,
                                                OracleStats* stats = nullptr);

}  // namespace deopt
