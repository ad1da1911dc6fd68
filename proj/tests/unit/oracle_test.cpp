#include <gtest/gtest.h>

#include "deopt/generator.hpp"
#include "deopt/oracle.hpp"
#include "dl_text.hpp"

using namespace deopt;
using deopt::testing::ints;
using deopt::testing::parse_dl;

namespace {

const char* kGuidingProgram = R"(
.decl a(x:number)
.decl b(x:number)
.decl c(x:number)
.decl d(x:number)
a(1). a(2). a(3). b(1).
c(X) :- a(X), !b(X).
d(X) :- c(X).
c(X) :- d(X).
b(X) :- a(X), X = 2.
.output b
)";

// Counts reference runs and hands them to the bug-free embedded engine.
class CountingAdapter : public EngineAdapter {
 public:
  RunOutcome run(const Program& p, Role role) override {
    ++runs;
    programs.push_back(p);
    return inner.run(p, role);
  }
  Dialect dialect() const override { return Dialect::Embedded; }
  std::string name() const override { return "counting"; }

  EmbeddedAdapter inner{OptConfig{}};
  std::size_t runs = 0;
  std::vector<Program> programs;
};

}  // namespace

TEST(Oracle, ReferenceProgramHasOneRuleAndItsInputs) {
  auto p = parse_dl(kGuidingProgram);
  StableFacts stable;
  stable.edb = p.edb;
  auto ref = build_reference_program(p, {0}, stable);
  ASSERT_EQ(ref.rules.size(), 1u);
  EXPECT_EQ(ref.outputs, std::vector<std::string>{"c"});
  EXPECT_EQ(ref.edb.get("a"), ints({1, 2, 3}));
  EXPECT_EQ(ref.edb.get("b"), ints({1}));
  EXPECT_TRUE(ref.decls.size() >= 3u);
}

TEST(Oracle, GenProgAndExecNegation) {
  auto p = parse_dl(kGuidingProgram);
  StableFacts stable;
  stable.edb = p.edb;
  stable.edb.insert("b", {Value::signed_int(2)});
  EmbeddedAdapter engine{OptConfig{}};
  auto res = gen_prog_and_exec(p, {0}, stable, engine);
  ASSERT_TRUE(std::holds_alternative<FactStore>(res));
  EXPECT_EQ(std::get<FactStore>(res).get("c"), ints({3}));
}

TEST(Oracle, GuidingExampleIteration) {
  auto p = parse_dl(kGuidingProgram);
  auto before = p;
  before.rules.pop_back();
  before.outputs = {"c"};
  EmbeddedAdapter engine{OptConfig{}};
  StableFacts stable;
  auto first = full_oracle(before, engine, {}, &stable);
  ASSERT_TRUE(std::holds_alternative<TupleSet>(first));
  EXPECT_EQ(std::get<TupleSet>(first), ints({2, 3}));
  EXPECT_EQ(stable.per_rule.at(0), ints({2, 3}));
  EXPECT_EQ(stable.per_rule.at(1), ints({2, 3}));

  auto g = build_graph(p);
  auto sub = affected_subgraph(g, 3);
  OracleStats stats;
  auto res = test_oracle_gen(p, sub, stable, "b", engine, {}, &stats);
  ASSERT_TRUE(std::holds_alternative<TupleSet>(res));
  EXPECT_EQ(std::get<TupleSet>(res), ints({1, 2}));
  EXPECT_EQ(stable.per_rule.at(3), ints({2}));
  EXPECT_EQ(stable.per_rule.at(0), ints({3}));
  EXPECT_EQ(stable.per_rule.at(1), ints({3}));
  EXPECT_EQ(stable.per_rule.at(2), ints({3}));
  EXPECT_EQ(stats.recursion_rounds, 2u);
}

TEST(Oracle, DivergentRecursionHitsTheRoundLimit) {
  auto p = parse_dl(R"(
.decl a(x:number)
.decl b(x:number)
b(0).
a(A + 1) :- b(A).
b(A) :- a(A).
.output a
)");
  CountingAdapter engine;
  OracleConfig cfg;
  cfg.max_iter = 25;
  OracleStats stats;
  auto res = full_oracle(p, engine, cfg, nullptr, &stats);
  ASSERT_TRUE(std::holds_alternative<OracleError>(res));
  EXPECT_EQ(std::get<OracleError>(res).kind, OracleErrorKind::MaxIterExceeded);
  EXPECT_EQ(stats.recursion_rounds, 25u);
  EXPECT_EQ(engine.runs, 50u);
}

TEST(Oracle, NegativeCycleRunsAsOneProgram) {
  auto p = parse_dl(R"(
.decl s(x:number)
.decl c(x:number)
.decl d(x:number)
d(A) :- c(A).
c(A) :- c(A), !d(A).
.output c
)");
  auto cond = condense(build_graph(p));
  ASSERT_EQ(cond.nodes.size(), 1u);
  CountingAdapter engine;
  StableFacts stable;
  stable.edb = p.edb;
  auto err = handle_recursion(p, cond.nodes[0], stable, engine, {});
  ASSERT_EQ(engine.programs.size(), 1u);
  const auto& combined = engine.programs[0];
  EXPECT_EQ(combined.rules.size(), 2u);
  EXPECT_EQ(std::set<std::string>(combined.outputs.begin(), combined.outputs.end()),
            (std::set<std::string>{"c", "d"}));
  // The embedded engine rejects the combined program, as a stratified engine would.
  ASSERT_TRUE(err);
  EXPECT_EQ(err->kind, OracleErrorKind::ExpectedError);
}

TEST(Oracle, GetFactsUnionsEveryDefiningRule) {
  auto p = parse_dl(R"(
.decl in(x:number)
.decl a(x:number)
in(0). in(1). a(9).
a(X) :- in(X), X = 0.
a(X) :- in(X), X = 1.
.output a
)");
  EmbeddedAdapter engine{OptConfig{}};
  auto res = full_oracle(p, engine, {});
  ASSERT_TRUE(std::holds_alternative<TupleSet>(res));
  EXPECT_EQ(std::get<TupleSet>(res), ints({0, 1, 9}));

  StableFacts only_edb;
  only_edb.edb = p.edb;
  auto edb_only = get_facts(p, only_edb, "a", engine);
  EXPECT_EQ(std::get<TupleSet>(edb_only), ints({9}));
}

TEST(Oracle, GetFactsResubsumesAcrossRules) {
  auto p = parse_dl(R"(
.decl in(x:number)
.decl m(x:number)
in(3). in(6). in(7).
m(X) :- in(X), X < 5.
m(X) :- in(X), X > 5.
m(E1) <= m(E2) :- E1 < E2.
.output m
)");
  EmbeddedAdapter engine{OptConfig{}};
  auto res = full_oracle(p, engine, {});
  ASSERT_TRUE(std::holds_alternative<TupleSet>(res));
  EXPECT_EQ(std::get<TupleSet>(res), ints({7}));
}

TEST(Oracle, TwoStepNodesOracle) {
  auto p = parse_dl(R"(
.decl seed(x:number)
.decl node(x:number)
.decl edge(x:number, y:number)
.decl result(x:number)
seed(1).
node(A) :- seed(A).
edge(A, A) :- seed(A).
edge(0, A) :- node(A).
result(C) :- edge(C, A), edge(A, _).
.output result
)");
  OptConfig buggy;
  buggy.injected_bugs.insert(BugId::SeminaiveDelta);
  EmbeddedAdapter engine{buggy};
  auto res = full_oracle(p, engine, {});
  ASSERT_TRUE(std::holds_alternative<TupleSet>(res));
  EXPECT_EQ(std::get<TupleSet>(res), ints({0, 1}));
}

TEST(Oracle, ExpectedErrorsAreClassified) {
  auto p = parse_dl(R"(
.decl a(x:number)
.decl b(x:number)
a(3).
b(X / 0) :- a(X).
.output b
)");
  EmbeddedAdapter engine{OptConfig{}};
  auto res = full_oracle(p, engine, {});
  ASSERT_TRUE(std::holds_alternative<OracleError>(res));
  const auto& e = std::get<OracleError>(res);
  EXPECT_EQ(e.kind, OracleErrorKind::ExpectedError);
  ASSERT_NE(e.outcome.semantic_error(), nullptr);
  EXPECT_EQ(e.outcome.semantic_error()->code, "div_zero");
}

// Master property: against a correct engine the oracle equals the naive
// evaluation, and the incrementally maintained oracle equals a recomputation
// from empty caches after every retained rule.
TEST(OracleProperties, SoundAndIncremental) {
  EmbeddedAdapter engine{OptConfig{}};
  GenConfig cfg;
  cfg.max_rules = 15;
  cfg.p_head = 0.15;
  std::size_t checked = 0, nonempty = 0, recursive = 0;
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    auto st = make_state(cfg, iteration_seed(99, seed));
    for (std::size_t attempts = 0; st.program.rules.size() < cfg.max_rules && attempts < 200; ++attempts) {
      auto res = try_extend(st, engine, cfg);
      ASSERT_NE(res.outcome, ExtendOutcome::EngineFailure);
      if (res.outcome != ExtendOutcome::Retained) continue;
      auto naive = evaluate_naive(st.program, st.program.edb);
      ASSERT_TRUE(naive.ok()) << naive.error().message;
      EXPECT_EQ(res.oracle, naive.facts().get(st.program.output_rel()));
      auto scratch = full_oracle(st.program, engine, {});
      ASSERT_TRUE(std::holds_alternative<TupleSet>(scratch));
      EXPECT_EQ(res.oracle, std::get<TupleSet>(scratch));
      ++checked;
      nonempty += !res.oracle.empty();
    }
    recursive += st.graph.has_cycle();
  }
  EXPECT_GT(checked, 400u);
  EXPECT_GT(nonempty, checked / 2);
  EXPECT_GT(recursive, 5u);
}

TEST(StableFacts, ViewExcludesTheRulesUnderEvaluation) {
  auto p = parse_dl(kGuidingProgram);
  StableFacts s;
  s.edb = p.edb;
  s.per_rule[0] = ints({3});
  s.per_rule[2] = ints({4});
  EXPECT_EQ(s.view_for(p, "c", {1}), ints({3, 4}));
  EXPECT_EQ(s.view_for(p, "c", {2}), ints({3}));
  EXPECT_EQ(s.view_for(p, "b", {}), ints({1}));
}
