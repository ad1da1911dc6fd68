#include <gtest/gtest.h>

#include "deopt/engine.hpp"
#include "dl_text.hpp"
#include "random_programs.hpp"

using namespace deopt;
using deopt::testing::floats;
using deopt::testing::ints;
using deopt::testing::parse_dl;

namespace {

const char* kTwoStepProgram = R"(
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
)";

const char* kSubsumeProgram = R"(
.decl a(x:number)
.decl b(x:number)
.decl eozn(x:number)
a(3). a(6). a(7).
b(X) :- a(X).
eozn(X) :- a(X), b(X).
eozn(E1) <= eozn(E2) :- E1 < E2.
.output eozn
)";

const char* kNegZeroProgram = R"(
.decl a(x:float)
.decl pos(x:float)
.decl out(x:float)
a(-0.0). a(0.0).
pos(A) :- a(A), A >= 0.0.
out(A) :- a(A), pos(A).
.output out
)";

const char* kInlineProgram = R"(
.decl a(x:number)
.decl b(x:number)
.decl c(x:number)
a(1). a(2). a(3).
b(X) :- a(X), X > 2.
c(X) :- b(X).
.output c
)";

TupleSet output_of(const EvalResult& r, const std::string& rel) {
  EXPECT_TRUE(r.ok()) << (r.ok() ? "" : r.error().message);
  return r.ok() ? r.facts().get(rel) : TupleSet{};
}

OptConfig with_bug(BugId b) {
  OptConfig o;
  o.injected_bugs.insert(b);
  return o;
}

}  // namespace

TEST(Engine, TransitiveClosure) {
  auto p = parse_dl(R"(
.decl edge(x:number, y:number)
.decl path(x:number, y:number)
edge(1, 2). edge(2, 3).
path(X, Y) :- edge(X, Y).
path(X, Z) :- path(X, Y), edge(Y, Z).
.output path
)");
  TupleSet want = {{Value::signed_int(1), Value::signed_int(2)},
                   {Value::signed_int(2), Value::signed_int(3)},
                   {Value::signed_int(1), Value::signed_int(3)}};
  EXPECT_EQ(output_of(evaluate_naive(p, {}), "path"), want);
  EXPECT_EQ(output_of(evaluate(p, {}, {}), "path"), want);
}

TEST(Engine, NegationOverLowerStratum) {
  auto p = parse_dl(R"(
.decl a(x:number)
.decl b(x:number)
.decl c(x:number)
a(1). a(2). a(3). b(1). b(2).
c(X) :- a(X), !b(X).
.output c
)");
  EXPECT_EQ(output_of(evaluate_naive(p, {}), "c"), ints({3}));
  EXPECT_EQ(output_of(evaluate(p, {}, {}), "c"), ints({3}));
}

TEST(Engine, RejectsNegationInsideRecursion) {
  auto p = parse_dl(R"(
.decl s(x:number)
.decl c(x:number)
.decl d(x:number)
s(1).
c(A) :- s(A).
d(A) :- c(A).
c(A) :- c(A), !d(A).
.output c
)");
  auto naive = evaluate_naive(p, {});
  ASSERT_FALSE(naive.ok());
  EXPECT_EQ(naive.error().code(), "unstratifiable");
  auto semi = evaluate(p, {}, {});
  ASSERT_FALSE(semi.ok());
  EXPECT_EQ(semi.error().code(), "unstratifiable");
}

TEST(Engine, ModuloByZeroIsASemanticError) {
  auto p = parse_dl(R"(
.decl a(x:number)
.decl b(x:number)
a(3).
b(X % 0) :- a(X).
.output b
)");
  auto r = evaluate(p, {}, {});
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(r.error().code(), "mod_zero");
}

TEST(Engine, ZeroArityRelations) {
  auto p = parse_dl(R"(
.decl a(x:number)
.decl yes()
.decl no()
a(1).
yes() :- a(1).
no() :- a(2).
.output yes
.output no
)");
  auto r = evaluate(p, {}, {});
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r.facts().get("yes").size(), 1u);
  EXPECT_TRUE(r.facts().get("no").empty());
}

TEST(Engine, SubsumptionKeepsTheLargest) {
  auto p = parse_dl(kSubsumeProgram);
  EXPECT_EQ(output_of(evaluate_naive(p, {}), "eozn"), ints({7}));
  EXPECT_EQ(output_of(evaluate(p, {}, {}), "eozn"), ints({7}));
}

TEST(Engine, ApplySubsumptionExamples) {
  auto p = parse_dl(R"(
.decl k(b:number, a:number)
k(B, A1) <= k(B, A2) :- A1 < A2.
)");
  const auto& sub = p.subsumptions.at(0);
  TupleSet in = {{Value::signed_int(1), Value::signed_int(-2)}, {Value::signed_int(1), Value::signed_int(9)}};
  TupleSet want = {{Value::signed_int(1), Value::signed_int(9)}};
  EXPECT_EQ(apply_subsumption(in, sub), want);
  EXPECT_TRUE(apply_subsumption({}, sub).empty());
}

TEST(Engine, MagicRewriteRestrictsIntermediates) {
  auto p = parse_dl(kNegZeroProgram);
  auto m = magic_rewrite(p);
  EXPECT_TRUE(m.fired);
  EXPECT_EQ(m.restricted, std::vector<std::string>{"pos"});
  EXPECT_EQ(output_of(evaluate(p, {}, OptConfig{true, false, false, {}}), "out"), floats({0.0}));
}

TEST(Engine, MagicLeavesRecursionAlone) {
  auto p = parse_dl(R"(
.decl e(x:number, y:number)
.decl t(x:number, y:number)
.decl out(x:number, y:number)
e(1, 2). e(2, 3).
t(X, Y) :- e(X, Y).
t(X, Z) :- t(X, Y), e(Y, Z).
out(X, Y) :- e(X, _), t(X, Y).
.output out
)");
  auto m = magic_rewrite(p);
  EXPECT_FALSE(m.fired);
  EXPECT_EQ(m.program, p);
}

TEST(Engine, InlineSubstitutesSingleRuleRelations) {
  auto p = parse_dl(R"(
.decl a(x:number)
.decl b(x:number)
.decl c(x:number)
a(1).
b(X) :- a(X).
c(X) :- b(X).
.output c
)");
  auto inl = inline_rewrite(p);
  EXPECT_EQ(inl.inlined, std::vector<std::string>{"b"});
  const Rule* c = nullptr;
  for (const auto& r : inl.program.rules)
    if (r.head.relation == "c") c = &r;
  ASSERT_NE(c, nullptr);
  ASSERT_EQ(c->body.size(), 1u);
  EXPECT_EQ(std::get<Atom>(c->body[0]).relation, "a");
}

TEST(Engine, InlineNeverTouchesOutputsOrRecursion) {
  auto p = parse_dl(R"(
.decl e(x:number, y:number)
.decl t(x:number, y:number)
.decl out(x:number, y:number)
e(1, 2).
t(X, Y) :- e(X, Y).
t(X, Z) :- t(X, Y), e(Y, Z).
out(X, Y) :- t(X, Y).
.output out
)");
  EXPECT_TRUE(inline_rewrite(p).inlined.empty());
}

// Each injected fault against its regression program: the naive engine gives
// the correct answer, the faulty one does not.
TEST(EngineBugs, SeminaiveDeltaTwoStepNodes) {
  auto p = parse_dl(kTwoStepProgram);
  EXPECT_EQ(output_of(evaluate_naive(p, {}), "result"), ints({0, 1}));
  EXPECT_EQ(output_of(evaluate(p, {}, {}), "result"), ints({0, 1}));
  EXPECT_EQ(output_of(evaluate(p, {}, with_bug(BugId::SeminaiveDelta)), "result"), ints({1}));
}

TEST(EngineBugs, SubsumeUnderMagicKeepsDominatedTuples) {
  auto p = parse_dl(kSubsumeProgram);
  EXPECT_EQ(output_of(evaluate(p, {}, with_bug(BugId::SubsumeUnderMagic)), "eozn"), ints({3, 6, 7}));
}

TEST(EngineBugs, MagicNegZeroAddsNegativeZero) {
  auto p = parse_dl(kNegZeroProgram);
  auto opt = with_bug(BugId::MagicNegZero);
  opt.enable_magic = true;
  EXPECT_EQ(output_of(evaluate_naive(p, {}), "out"), floats({0.0}));
  EXPECT_EQ(output_of(evaluate(p, {}, opt), "out"), floats({-0.0, 0.0}));
}

TEST(EngineBugs, InlineDropLiteralLosesTheFilter) {
  auto p = parse_dl(kInlineProgram);
  EXPECT_EQ(output_of(evaluate_naive(p, {}), "c"), ints({3}));
  EXPECT_EQ(output_of(evaluate(p, {}, with_bug(BugId::InlineDropLiteral)), "c"), ints({1, 2, 3}));
}

TEST(EngineBugs, SingleRuleProgramsAreUnaffected) {
  auto p = parse_dl(R"(
.decl a(x:float)
.decl b(x:float)
a(-0.0). a(0.0). a(1.0).
b(A) :- a(A), A >= 0.0.
b(A) :- a(A), A < 0.0.
.output b
)");
  for (auto bug : all_bugs()) {
    auto single = p;
    single.rules.resize(1);
    EXPECT_EQ(output_of(evaluate(single, {}, with_bug(bug)), "b"), output_of(evaluate_naive(single, {}), "b"))
        << bug_name(bug);
  }
}

TEST(EngineProperties, FixpointIsStable) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    auto p = deopt::testing::random_program(rng);
    auto r = evaluate_naive(p, {});
    if (!r.ok()) continue;
    FactStore all = p.edb;
    all.merge(r.facts());
    auto again = evaluate_naive(p, all);
    ASSERT_TRUE(again.ok());
    if (!p.subsumptions.empty()) continue;  // re-adding dominated tuples is not a fixpoint question
    for (const auto& d : p.decls) EXPECT_EQ(again.facts().get(d.name), r.facts().get(d.name)) << d.name;
  }
}

TEST(EngineProperties, MonotoneWithoutNegation) {
  std::mt19937_64 rng(12);
  deopt::testing::RandomProgramOptions opt;
  opt.p_negation = 0.0;
  opt.p_subsumption = 0.0;
  for (int i = 0; i < 100; ++i) {
    auto p = deopt::testing::random_program(rng, opt);
    auto small = p;
    for (auto& [rel, tuples] : small.edb.relations())
      if (!tuples.empty()) {
        auto t = tuples;
        t.erase(t.begin());
        small.edb.set(rel, t);
      }
    auto a = evaluate(small, {}, {});
    auto b = evaluate(p, {}, {});
    if (!a.ok() || !b.ok()) continue;
    for (const auto& d : p.decls)
      for (const auto& t : a.facts().get(d.name)) EXPECT_TRUE(b.facts().get(d.name).count(t)) << d.name;
  }
}

TEST(EngineProperties, SeminaiveMatchesNaiveForEveryFlagCombination) {
  std::mt19937_64 rng(13);
  int nonempty = 0, magic = 0, inlined = 0, recursive = 0;
  for (int i = 0; i < 150; ++i) {
    auto p = deopt::testing::random_program(rng);
    auto want = evaluate_naive(p, {});
    nonempty += want.ok() && !want.facts().get(p.output_rel()).empty();
    for (const auto& r : p.rules)
      if (body_relations(r).count(r.head.relation)) {
        ++recursive;
        break;
      }
    for (const auto& opt : all_flag_combinations()) {
      EvalStats stats;
      auto got = evaluate(p, {}, opt, {}, &stats);
      magic += stats.magic_fired;
      inlined += stats.inlined_relations > 0;
      ASSERT_EQ(got.ok(), want.ok()) << "program " << i;
      if (!got.ok()) continue;
      EXPECT_EQ(got.facts().get(p.output_rel()), want.facts().get(p.output_rel())) << "program " << i;
      if (!opt.enable_magic && !opt.enable_inline)
        for (const auto& d : p.decls) EXPECT_EQ(got.facts().get(d.name), want.facts().get(d.name)) << d.name;
    }
  }
  EXPECT_GT(nonempty, 50);
  EXPECT_GT(magic, 20);
  EXPECT_GT(inlined, 20);
  EXPECT_GT(recursive, 20);
}

TEST(EngineProperties, ResourceLimitStopsRunawayPrograms) {
  auto p = parse_dl(R"(
.decl a(x:number)
a(0).
a(X + 1) :- a(X).
.output a
)");
  EvalLimits limits;
  limits.max_tuples_per_relation = 100;
  auto r = evaluate(p, {}, {}, limits);
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(r.error().code(), "resource_limit");
}
