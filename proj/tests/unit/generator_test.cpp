#include <gtest/gtest.h>

#include "deopt/generator.hpp"
#include "deopt/ir_json.hpp"
#include "deopt/safety.hpp"
#include "dl_text.hpp"

using namespace deopt;
using deopt::testing::ints;
using deopt::testing::parse_dl;

namespace {

GenConfig small_config(std::uint64_t seed, std::size_t max_rules = 12) {
  GenConfig cfg;
  cfg.seed = seed;
  cfg.max_rules = max_rules;
  return cfg;
}

// Skeleton declarations plus the four rules of the two-step example.
const char* kTwoStep = R"(
.decl seed(x:number)
.decl node(x:number)
.decl edge(x:number, y:number)
.decl result(x:number)
seed(1).
node(A) :- seed(A).
edge(A, A) :- seed(A).
edge(0, A) :- node(A).
result(C) :- edge(C, A), edge(A, _).
)";

}  // namespace

TEST(Generator, DefaultsMatchTheEvaluationSettings) {
  GenConfig cfg;
  EXPECT_EQ(cfg.max_rules, 100u);
  EXPECT_FALSE(cfg.max_att);
  EXPECT_DOUBLE_EQ(cfg.p_empty, 0.1);
  EXPECT_DOUBLE_EQ(cfg.p_head, 0.02);
  EXPECT_EQ(cfg.max_iter, 100u);
}

TEST(Generator, SkeletonIsDeterministic) {
  GenConfig cfg;
  std::mt19937_64 a(17), b(17), c(18);
  auto pa = gen_skeleton(cfg, a);
  auto pb = gen_skeleton(cfg, b);
  EXPECT_EQ(program_to_json_text(pa), program_to_json_text(pb));
  EXPECT_TRUE(pa.rules.empty());
  EXPECT_GE(pa.decls.size(), cfg.skeleton.min_relations);
  EXPECT_LE(pa.decls.size(), cfg.skeleton.max_relations);
  bool differs = false;
  for (int i = 0; i < 5 && !differs; ++i) differs = program_to_json_text(gen_skeleton(cfg, c)) != program_to_json_text(pa);
  EXPECT_TRUE(differs);
}

TEST(Generator, SkeletonMayHaveEmptyRelations) {
  GenConfig cfg;
  cfg.skeleton.min_facts = 0;
  cfg.skeleton.max_facts = 0;
  std::mt19937_64 rng(1);
  auto p = gen_skeleton(cfg, rng);
  for (const auto& d : p.decls) EXPECT_EQ(p.edb.size(d.name), 0u);
}

TEST(Generator, IterationIsDeterministic) {
  EmbeddedAdapter engine{OptConfig{}};
  auto cfg = small_config(11, 25);
  cfg.p_head = 0.2;
  for (std::uint64_t it = 0; it < 5; ++it) {
    auto a = run_iteration(cfg, engine, it);
    auto b = run_iteration(cfg, engine, it);
    EXPECT_EQ(program_to_json_text(a.program), program_to_json_text(b.program));
    EXPECT_EQ(a.attempts, b.attempts);
    EXPECT_EQ(a.reference_runs, b.reference_runs);
    ASSERT_EQ(a.outcomes.size(), b.outcomes.size());
    for (std::size_t i = 0; i < a.outcomes.size(); ++i) {
      EXPECT_EQ(a.outcomes[i].outcome, b.outcomes[i].outcome);
      EXPECT_EQ(a.outcomes[i].code, b.outcomes[i].code);
    }
  }
  EXPECT_NE(iteration_seed(1, 0), iteration_seed(1, 1));
  EXPECT_NE(iteration_seed(1, 0), iteration_seed(2, 0));
}

TEST(Generator, CandidatesAreAlwaysSafe) {
  GenConfig cfg;
  cfg.p_head = 0.3;
  cfg.features.negation = 0.6;
  cfg.features.constraint = 0.6;
  cfg.features.arithmetic = 0.5;
  cfg.features.wildcard = 0.3;
  EmbeddedAdapter engine{OptConfig{}};
  std::size_t generated = 0, negated = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto st = make_state(cfg, seed);
    for (int grow = 0; grow < 5; ++grow) try_extend(st, engine, cfg);
    for (int i = 0; i < 100; ++i) {
      auto c = gen_candidate_rule(st, cfg);
      if (c.no_compatible_head) continue;
      EXPECT_EQ(check_safety(c.rule), std::nullopt);
      ++generated;
      for (const auto& l : c.rule.body)
        if (const auto* a = as_atom(l); a && a->negated) ++negated;
    }
  }
  EXPECT_GE(generated, 9000u);
  EXPECT_GT(negated, 1000u);
}

TEST(Generator, RetainedProgramsAreSafeAndStratified) {
  EmbeddedAdapter engine{OptConfig{}};
  auto cfg = small_config(3, 20);
  cfg.p_head = 0.3;
  cfg.max_att = 50;
  for (std::uint64_t it = 0; it < 30; ++it) {
    auto t = run_iteration(cfg, engine, it);
    EXPECT_LE(t.rules, cfg.max_rules);
    for (auto a : t.attempts) EXPECT_LE(a, *cfg.max_att);
    for (const auto& r : t.program.rules) EXPECT_EQ(check_safety(r), std::nullopt);
    EXPECT_FALSE(std::holds_alternative<std::string>(relation_levels(t.program)));
    EXPECT_TRUE(t.reports.empty());
    if (!t.program.rules.empty()) EXPECT_EQ(t.program.output_rel(), t.program.rules.back().head.relation);
  }
}

TEST(Generator, PEmptyZeroNeverRetainsEmptyRules) {
  EmbeddedAdapter engine{OptConfig{}};
  auto cfg = small_config(5, 15);
  cfg.p_empty = 0.0;
  std::size_t discarded = 0;
  for (std::uint64_t it = 0; it < 20; ++it) {
    auto st = make_state(cfg, iteration_seed(cfg.seed, it));
    for (int attempt = 0; attempt < 150 && st.program.rules.size() < cfg.max_rules; ++attempt) {
      auto r = try_extend(st, engine, cfg);
      if (r.outcome == ExtendOutcome::DiscardedEmpty) ++discarded;
      if (r.outcome == ExtendOutcome::Retained) {
        EXPECT_FALSE(r.oracle.empty());
        EXPECT_FALSE(st.stable.per_rule.at(r.rule).empty());
      }
    }
  }
  EXPECT_GT(discarded, 0u);
}

TEST(Generator, PEmptyOneNeverDiscardsForEmptiness) {
  EmbeddedAdapter engine{OptConfig{}};
  auto cfg = small_config(6, 15);
  cfg.p_empty = 1.0;
  std::size_t retained_empty = 0;
  for (std::uint64_t it = 0; it < 20; ++it) {
    auto t = run_iteration(cfg, engine, it);
    EXPECT_EQ(t.discarded_empty, 0u);
    retained_empty += t.retained_empty;
  }
  EXPECT_GT(retained_empty, 0u);
}

TEST(Generator, EmptySkeletonExhaustsTheAttempts) {
  EmbeddedAdapter engine{OptConfig{}};
  auto cfg = small_config(7, 10);
  cfg.skeleton.min_facts = 0;
  cfg.skeleton.max_facts = 0;
  cfg.p_empty = 0.0;
  cfg.max_att = 10;
  auto t = run_iteration(cfg, engine, 0);
  EXPECT_TRUE(t.exhausted);
  EXPECT_EQ(t.rules, 0u);
  EXPECT_EQ(t.outcomes.size(), 10u);
  for (const auto& o : t.outcomes) EXPECT_NE(o.outcome, ExtendOutcome::Retained);
}

TEST(Generator, NoExistingHeadsMeansNoCycles) {
  EmbeddedAdapter engine{OptConfig{}};
  auto cfg = small_config(8, 30);
  cfg.p_head = 0.0;
  for (std::uint64_t it = 0; it < 20; ++it) {
    auto t = run_iteration(cfg, engine, it);
    EXPECT_EQ(t.cycles.count, 0u);
    EXPECT_FALSE(build_graph(t.program).has_cycle());
  }
}

TEST(Generator, OneRuleMeansOneRunEach) {
  EmbeddedAdapter engine{OptConfig{}};
  auto cfg = small_config(9, 1);
  cfg.p_empty = 1.0;
  std::size_t single = 0;
  for (std::uint64_t it = 0; it < 20; ++it) {
    auto t = run_iteration(cfg, engine, it);
    EXPECT_LE(t.rules, 1u);
    if (t.outcomes.size() != 1 || t.rules != 1) continue;
    ++single;
    EXPECT_EQ(t.reference_runs, 1u);
    EXPECT_EQ(t.optimized_runs, 1u);
  }
  EXPECT_GT(single, 10u);
}

TEST(Generator, ModuloByZeroIsDiscarded) {
  auto script = parse_dl(R"(
.decl in(x:number)
.decl t(x:number)
.decl u(x:number)
in(0). in(1).
t(X) :- in(X).
u(X % 0) :- t(X).
)");
  EmbeddedAdapter engine{OptConfig{}};
  auto t = run_iteration_scripted(script, script.rules, engine, GenConfig{});
  EXPECT_EQ(t.retained, 1u);
  EXPECT_EQ(t.discarded_error, 1u);
  ASSERT_EQ(t.outcomes.size(), 2u);
  EXPECT_EQ(t.outcomes[1].outcome, ExtendOutcome::DiscardedError);
  EXPECT_EQ(t.outcomes[1].code, "mod_zero");
  EXPECT_EQ(t.program.rules.size(), 1u);
  EXPECT_EQ(t.program.find_decl("u") != nullptr, true);
}

TEST(Generator, TwoStepScriptFindsTheDeltaBug) {
  auto script = parse_dl(kTwoStep);
  OptConfig opt;
  opt.injected_bugs.insert(BugId::SeminaiveDelta);
  EmbeddedAdapter engine{opt};
  auto t = run_iteration_scripted(script, script.rules, engine, GenConfig{});
  ASSERT_EQ(t.reports.size(), 1u);
  const auto& r = t.reports[0];
  EXPECT_EQ(r.kind, BugKind::Logic);
  EXPECT_EQ(r.rule_index, 3u);
  EXPECT_EQ(t.discrepancy_at, 4u);
  EXPECT_EQ(r.output_rel, "result");
  EXPECT_EQ(r.oracle, ints({0, 1}));
  EXPECT_EQ(r.diff.only_in_a, ints({0}));
  EXPECT_TRUE(r.diff.only_in_b.empty());

  EmbeddedAdapter correct{OptConfig{}};
  auto clean = run_iteration_scripted(script, script.rules, correct, GenConfig{});
  EXPECT_TRUE(clean.reports.empty());
  EXPECT_EQ(clean.retained, 4u);
  EXPECT_EQ(clean.optimized_runs, 4u);
}

TEST(Generator, RandomBaselineJudgesOnlyTheFinalProgram) {
  EmbeddedAdapter engine{OptConfig{}};
  auto cfg = small_config(10, 10);
  std::size_t valid = 0, nonempty = 0;
  for (std::uint64_t it = 0; it < 30; ++it) {
    auto t = run_iteration_random(cfg, engine, it);
    EXPECT_TRUE(t.random_arm);
    EXPECT_EQ(t.rules, cfg.max_rules);
    EXPECT_LE(t.optimized_runs, 1u);
    EXPECT_TRUE(t.reports.empty());
    valid += t.valid;
    nonempty += t.valid && !t.output_empty;
  }
  EXPECT_GT(valid, 0u);
  EXPECT_LE(nonempty, valid);
}

TEST(Generator, BugProfilesRaiseTheRelevantFeatures) {
  GenConfig base;
  auto delta = with_bug_features(base, BugId::SeminaiveDelta);
  EXPECT_GT(delta.p_head, base.p_head);
  auto negzero = with_bug_features(base, BugId::MagicNegZero);
  EXPECT_GT(negzero.kinds.floating, base.kinds.floating);
  EXPECT_GT(negzero.features.constraint, base.features.constraint);
  auto subsume = with_bug_features(base, BugId::SubsumeUnderMagic);
  EXPECT_GT(subsume.features.subsumption, base.features.subsumption);
  auto inl = with_bug_features(base, BugId::InlineDropLiteral);
  EXPECT_GT(inl.features.annotation, base.features.annotation);
  EXPECT_EQ(inl.max_rules, base.max_rules);
  EXPECT_EQ(inl.seed, base.seed);
}
