#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "deopt/adapters.hpp"
#include "deopt/discrepancy.hpp"
#include "deopt/oracle.hpp"
#include "deopt/stratify.hpp"

namespace deopt {

/// Probability of each optional construct in a candidate rule.
struct FeatureProbs {
  double negation = 0.25;      // one negated atom
  double constraint = 0.4;     // per constraint, up to two
  double arithmetic = 0.15;    // arithmetic in a head argument or a constraint
  double wildcard = 0.1;       // per body argument
  double constant_arg = 0.05;  // per body argument
  double subsumption = 0.05;   // subsumption rule on a fresh head relation
  double annotation = 0.1;     // optimization annotation on a fresh head relation
  double join = 0.5;           // reuse of an already bound variable in a body atom
};

struct ValuePools {
  std::int64_t int_min = 0;
  std::int64_t int_max = 9;
  std::vector<double> floats = {-0.0, 0.0, 0.5, 1.0, 2.0, -1.0};
  std::vector<std::string> symbols = {"a", "b", "c", "d"};
};

struct SkeletonSizes {
  std::size_t min_relations = 1;
  std::size_t max_relations = 3;
  std::size_t min_arity = 1;
  std::size_t max_arity = 3;
  std::size_t min_facts = 1;
  std::size_t max_facts = 8;
};

/// Relative weights of the attribute kinds in generated declarations.
struct KindWeights {
  double signed_int = 0.5;
  double unsigned_int = 0.1;
  double floating = 0.2;
  double symbol = 0.2;
};

struct GenConfig {
  std::size_t max_rules = 100;
  std::optional<std::size_t> max_att;  // nullopt: unlimited
  double p_empty = 0.1;
  double p_head = 0.02;
  std::size_t max_iter = 100;
  std::uint64_t seed = 0;

  FeatureProbs features;
  ValuePools pools;
  SkeletonSizes skeleton;
  KindWeights kinds;
  std::size_t max_body_atoms = 3;
  std::size_t max_head_arity = 3;
  Dialect dialect = Dialect::Embedded;  // restricts kinds and constructs
  bool stratified_only = true;
};

/// `base` with the constructs that `bug` depends on made more likely.
GenConfig with_bug_features(GenConfig base, BugId bug);

/// Seed of iteration `index` of a campaign seeded with `seed`.
std::uint64_t iteration_seed(std::uint64_t seed, std::uint64_t index);

enum class ExtendOutcome : std::uint8_t { Retained, DiscardedEmpty, DiscardedError, Exhausted, EngineFailure };
std::string_view extend_outcome_name(ExtendOutcome o);

struct RuleRecord {
  RuleId id = 0;
  ExtendOutcome outcome = ExtendOutcome::Retained;
  std::string code;  // error code for DiscardedError
};

struct TestIterationState {
  Program program;  // retained rules in id order; EDB is the skeleton
  StableFacts stable;
  PrecedenceGraph graph;
  std::mt19937_64 rng;
  std::size_t attempts_since_success = 0;
  RuleId next_rule_id = 0;
  std::size_t next_relation = 0;
  std::vector<RuleRecord> trace;
  OracleStats oracle_stats;
};

/// Declarations plus EDB facts of a fresh test case.
Program gen_skeleton(const GenConfig& cfg, std::mt19937_64& rng);

TestIterationState make_state(const GenConfig& cfg, std::uint64_t seed);

/// A candidate rule together with the declaration of a fresh head relation
/// and the optional subsumption rule introduced with it.
struct Candidate {
  Rule rule;
  std::optional<RelationDecl> new_decl;
  std::optional<SubsumptionRule> subsumption;
  bool existing_head = false;
  bool no_compatible_head = false;  // p_head fired but nothing matched
};

Candidate gen_candidate_rule(TestIterationState& state, const GenConfig& cfg);

struct ExtendResult {
  ExtendOutcome outcome = ExtendOutcome::Retained;
  RuleId rule = 0;
  std::string code;
  TupleSet oracle;                    // Retained: test oracle of the new output relation
  std::optional<OracleError> failure;  // EngineFailure
};

/// One generation attempt: appends the candidate, runs the incremental
/// oracle and keeps or rolls back the change.
ExtendResult try_extend(TestIterationState& state, EngineAdapter& engine, const GenConfig& cfg);

/// Appends `candidate` regardless of emptiness; used by scripted runs.
ExtendResult force_extend(TestIterationState& state, EngineAdapter& engine, const GenConfig& cfg,
                          Candidate candidate);

struct IterationTrace {
  std::uint64_t seed = 0;
  std::uint64_t iteration = 0;
  bool random_arm = false;
  std::size_t rules = 0;
  std::size_t retained = 0;
  std::size_t retained_empty = 0;
  std::size_t discarded_empty = 0;
  std::size_t discarded_error = 0;
  bool exhausted = false;
  bool valid = true;
  bool output_empty = true;  // the final test case produced no output facts
  std::vector<std::size_t> attempts;  // attempts needed per retained rule
  std::vector<RuleRecord> outcomes;
  std::size_t reference_runs = 0;
  std::size_t optimized_runs = 0;
  double reference_time_s = 0.0;
  double optimized_time_s = 0.0;
  CycleStats cycles;
  std::optional<std::size_t> discrepancy_at;  // number of rules when the first bug showed
  std::vector<BugReport> reports;
  Program program;
};

/// Grows a test case rule by rule until max_rules or max_att, checking the
/// optimized program after every retained rule. Stops at the first report.
IterationTrace run_iteration(const GenConfig& cfg, EngineAdapter& engine, std::uint64_t iteration = 0);

/// Replays a fixed rule sequence over a fixed skeleton; every rule is kept.
IterationTrace run_iteration_scripted(const Program& skeleton, const std::vector<Rule>& rules,
                                      EngineAdapter& engine, const GenConfig& cfg);

/// Baseline: draws max_rules rules without feedback, then builds the oracle
/// and checks the final program once.
IterationTrace run_iteration_random(const GenConfig& cfg, EngineAdapter& engine, std::uint64_t iteration = 0);

}  // namespace deopt
