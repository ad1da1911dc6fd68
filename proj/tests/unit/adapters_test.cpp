#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "deopt/adapters.hpp"
#include "deopt/discrepancy.hpp"
#include "deopt/grammar_check.hpp"
#include "deopt/ir_json.hpp"
#include "deopt/subprocess.hpp"
#include "dl_text.hpp"
#include "random_programs.hpp"

using namespace deopt;
using deopt::testing::floats;
using deopt::testing::ints;
using deopt::testing::parse_dl;
namespace fs = std::filesystem;

namespace {

const char* kNegZero = R"(
.decl a(x:float)
.decl pos(x:float)
.decl out(x:float)
a(-0.0). a(0.0).
pos(A) :- a(A), A >= 0.0.
out(A) :- a(A), pos(A).
.output out
)";

std::string scratch_dir(const std::string& name) {
  auto dir = fs::path(DEOPT_TEST_TMP) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

EngineSpec cli_spec(const std::string& name) {
  EngineSpec s;
  s.name = name;
  s.dialect = Dialect::Embedded;
  s.executable = DEOPT_CLI_PATH;
  s.args = {"exec", "--program", "{program}", "--out", "{outdir}"};
  s.timeout_s = 60;
  s.error_catalog = {{"div_zero", "error\\[div_zero\\]"}, {"mod_zero", "error\\[mod_zero\\]"}};
  s.workdir_root = scratch_dir(name);
  s.keep = WorkdirPolicy::KeepNever;
  return s;
}

}  // namespace

TEST(Render, DeterministicInEveryDialect) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 60; ++i) {
    auto p = deopt::testing::random_program(rng);
    for (auto d : {Dialect::SouffleLike, Dialect::CozoLike, Dialect::MuZLike, Dialect::Embedded}) {
      if (check_feature_set(p, d)) continue;
      auto a = render_program(p, d, Role::Optimized, false);
      auto b = render_program(p, d, Role::Optimized, false);
      EXPECT_EQ(a.program_text, b.program_text);
      EXPECT_EQ(a.files, b.files);
      auto bad = check_syntax(d, a.program_text);
      EXPECT_FALSE(bad) << dialect_name(d) << ": " << *bad << "\n" << a.program_text;
    }
  }
}

TEST(Render, SouffleProgramShape) {
  auto p = parse_dl(kNegZero);
  auto r = render_program(p, Dialect::SouffleLike, Role::Optimized, false);
  EXPECT_NE(r.program_text.find(".decl out(x:float)"), std::string::npos);
  EXPECT_NE(r.program_text.find(".output out"), std::string::npos);
  EXPECT_NE(r.program_text.find(".input a"), std::string::npos);
  ASSERT_EQ(r.files.count("facts/a.facts"), 1u);
  EXPECT_EQ(r.files.at("facts/a.facts"), "-0\n0\n");
  EXPECT_EQ(r.outputs, std::vector<std::string>{"out"});
}

TEST(Render, ReferenceRoleDropsInline) {
  auto p = parse_dl(R"(
.decl a(x:number)
.decl b(x:number) inline
.decl c(x:number)
b(X) :- a(X).
c(X) :- b(X).
.output c
)");
  auto opt = render_program(p, Dialect::SouffleLike, Role::Optimized, false);
  auto ref = render_program(p, Dialect::SouffleLike, Role::Reference, true);
  EXPECT_NE(opt.program_text.find("inline"), std::string::npos);
  EXPECT_EQ(ref.program_text.find("inline"), std::string::npos);
}

TEST(Render, FeatureSetLimits) {
  auto p = parse_dl(kNegZero);
  EXPECT_FALSE(check_feature_set(p, Dialect::SouffleLike));
  EXPECT_FALSE(check_feature_set(p, Dialect::Embedded));
  auto sub = parse_dl(R"(
.decl a(x:number)
.decl m(x:number)
m(X) :- a(X).
m(E1) <= m(E2) :- E1 < E2.
.output m
)");
  EXPECT_TRUE(check_feature_set(sub, Dialect::MuZLike));
}

TEST(GrammarCheck, RejectsBrokenText) {
  EXPECT_TRUE(check_syntax(Dialect::SouffleLike, ".decl a(x:number)\na(X) :- b(X)\n"));
  EXPECT_TRUE(check_syntax(Dialect::Embedded, "{not json"));
  EXPECT_FALSE(check_syntax(Dialect::SouffleLike, ".decl a(x:number)\n.decl b(x:number)\na(X) :- b(X).\n"));
}

TEST(FactRows, ParsesEveryKind) {
  std::string err;
  auto rows = parse_fact_rows("1\t2u\n\n-3\t7\n", {Kind::Signed, Kind::Unsigned}, &err);
  EXPECT_FALSE(rows) << "2u is not an unsigned column value";
  rows = parse_fact_rows("1\t2\n\n-3\t7\n", {Kind::Signed, Kind::Unsigned}, &err);
  ASSERT_TRUE(rows) << err;
  EXPECT_EQ(rows->size(), 2u);
  EXPECT_EQ(rows->count({Value::signed_int(-3), Value::unsigned_int(7)}), 1u);

  auto f = parse_fact_rows("-0\n0\n0.5\n", {Kind::Float}, &err);
  ASSERT_TRUE(f) << err;
  EXPECT_EQ(*f, floats({-0.0, 0.0, 0.5}));

  auto csv = parse_fact_rows("a,1\nb,2\n", {Kind::Symbol, Kind::Signed}, &err, ',');
  ASSERT_TRUE(csv) << err;
  EXPECT_EQ(csv->size(), 2u);

  EXPECT_FALSE(parse_fact_rows("1\t2\t3\n", {Kind::Signed}, &err));
  EXPECT_FALSE(err.empty());
}

TEST(FactRows, RenderRoundTrip) {
  TupleSet t = {{Value::floating(-0.0), Value::symbol("x y")}, {Value::floating(1e-300), Value::symbol("z")}};
  std::string err;
  auto back = parse_fact_rows(render_fact_file(t), {Kind::Float, Kind::Symbol}, &err);
  ASSERT_TRUE(back) << err;
  EXPECT_EQ(*back, t);
}

TEST(EngineOutput, ReadsFactFiles) {
  auto p = parse_dl(kNegZero);
  auto dir = scratch_dir("engine_output");
  std::ofstream(fs::path(dir) / "out.facts") << "0\n";
  std::string err;
  auto facts = parse_engine_output(Dialect::Embedded, p, {"out"}, dir, "", &err);
  ASSERT_TRUE(facts) << err;
  EXPECT_EQ(facts->get("out"), floats({0.0}));
  EXPECT_FALSE(parse_engine_output(Dialect::Embedded, p, {"pos"}, dir, "", &err));
}

TEST(EngineSpec, JsonRoundTrip) {
  auto s = cli_spec("spec_roundtrip");
  s.optimization_args = {"--magic"};
  s.keep = WorkdirPolicy::KeepAlways;
  auto back = EngineSpec::from_json_text(s.to_json_text());
  EXPECT_EQ(back.to_json_text(), s.to_json_text());
  EXPECT_EQ(back.executable, s.executable);
  EXPECT_EQ(back.keep, WorkdirPolicy::KeepAlways);
  EXPECT_THROW(EngineSpec::from_json_text("{\"name\": 1}"), ConfigError);
  EXPECT_THROW(EngineSpec::load("/nonexistent/spec.json"), ConfigError);
}

TEST(Subprocess, CapturesOutputAndStatus) {
  auto r = run_process({"sh", "-c", "echo out; echo err >&2; exit 4"}, DEOPT_TEST_TMP, 10);
  EXPECT_EQ(r.out, "out\n");
  EXPECT_EQ(r.err, "err\n");
  EXPECT_EQ(r.exit_code, 4);
  EXPECT_FALSE(r.exited_ok());
  auto missing = run_process({"/nonexistent/engine"}, DEOPT_TEST_TMP, 10);
  EXPECT_TRUE(missing.spawn_failed);
}

TEST(Subprocess, TimeoutKillsTheProcess) {
  auto r = run_process({"sleep", "30"}, DEOPT_TEST_TMP, 0.3);
  EXPECT_TRUE(r.timed_out);
  EXPECT_LT(r.elapsed_s, 10.0);
}

TEST(ProcessAdapter, RunsTheCliEngine) {
  auto p = parse_dl(kNegZero);
  ProcessAdapter correct(cli_spec("cli_correct"));
  auto out = correct.run(p, Role::Optimized);
  ASSERT_TRUE(out.has_facts()) << out.describe();
  EXPECT_EQ(out.facts().get("out"), floats({0.0}));

  auto spec = cli_spec("cli_buggy");
  spec.optimization_args = {"--inject", "BUG_MAGIC_NEGZERO"};
  ProcessAdapter buggy(spec, true);
  auto opt = buggy.run(p, Role::Optimized);
  ASSERT_TRUE(opt.has_facts()) << opt.describe();
  EXPECT_EQ(opt.facts().get("out"), floats({-0.0, 0.0}));
  // Stripped reference runs leave the optimization arguments out.
  auto ref = buggy.run(p, Role::Reference);
  ASSERT_TRUE(ref.has_facts()) << ref.describe();
  EXPECT_EQ(ref.facts().get("out"), floats({0.0}));

  auto report = check_discrepancy(ref.facts().get("out"), opt, "out");
  ASSERT_TRUE(report);
  EXPECT_EQ(report->kind, BugKind::Logic);
  EXPECT_EQ(report->diff.only_in_b, floats({-0.0}));
}

TEST(ProcessAdapter, CatalogMatchesAndUnknownErrors) {
  auto p = parse_dl(R"(
.decl a(x:number)
.decl b(x:number)
a(3).
b(X % 0) :- a(X).
.output b
)");
  ProcessAdapter engine(cli_spec("cli_errors"));
  auto out = engine.run(p, Role::Optimized);
  ASSERT_TRUE(out.expected_error()) << out.describe();
  EXPECT_EQ(out.semantic_error()->code, "mod_zero");
  EXPECT_FALSE(check_discrepancy({}, out, "b"));

  auto spec = cli_spec("cli_uncatalogued");
  spec.error_catalog.clear();
  ProcessAdapter bare(spec);
  auto unknown = bare.run(p, Role::Optimized);
  ASSERT_NE(unknown.semantic_error(), nullptr);
  EXPECT_FALSE(unknown.expected_error());
  auto report = check_discrepancy({}, unknown, "b");
  ASSERT_TRUE(report);
  EXPECT_EQ(report->kind, BugKind::SemanticErrorUnexpected);
}

TEST(ProcessAdapter, HangIsReported) {
  EngineSpec s;
  s.name = "sleeper";
  s.dialect = Dialect::Embedded;
  s.executable = "sleep";
  s.args = {"30"};
  s.timeout_s = 0.3;
  s.workdir_root = scratch_dir("sleeper");
  s.keep = WorkdirPolicy::KeepOnFailure;
  ProcessAdapter engine(s);
  auto out = engine.run(parse_dl(kNegZero), Role::Optimized);
  ASSERT_TRUE(std::holds_alternative<TimeoutOutcome>(out.result));
  EXPECT_TRUE(fs::exists(out.workdir));
  auto report = check_discrepancy({}, out, "out");
  ASSERT_TRUE(report);
  EXPECT_EQ(report->kind, BugKind::Hang);
}

TEST(ProcessAdapter, CrashIsReported) {
  EngineSpec s;
  s.name = "crasher";
  s.dialect = Dialect::Embedded;
  s.executable = "sh";
  s.args = {"-c", "kill -SEGV $$"};
  s.workdir_root = scratch_dir("crasher");
  ProcessAdapter engine(s);
  auto out = engine.run(parse_dl(kNegZero), Role::Optimized);
  ASSERT_TRUE(std::holds_alternative<CrashOutcome>(out.result)) << out.describe();
  EXPECT_EQ(std::get<CrashOutcome>(out.result).signal, SIGSEGV);
  EXPECT_EQ(check_discrepancy({}, out, "out")->kind, BugKind::Crash);
}

TEST(ProcessAdapter, MissingExecutableIsAConfigError) {
  auto s = cli_spec("cli_missing");
  s.executable = "/nonexistent/engine";
  ProcessAdapter engine(s);
  EXPECT_THROW(engine.run(parse_dl(kNegZero), Role::Optimized), ConfigError);
}

TEST(EmbeddedAdapter, ClassifiesErrors) {
  auto p = parse_dl(R"(
.decl a(x:number)
.decl b(x:number)
a(3).
b(X / 0) :- a(X).
.output b
)");
  EmbeddedAdapter engine{OptConfig{}};
  auto out = engine.run(p, Role::Reference);
  ASSERT_TRUE(out.expected_error());
  EXPECT_EQ(out.semantic_error()->code, "div_zero");
  EXPECT_EQ(out.kind_name(), "semantic_error");
}

TEST(Discrepancy, EqualFactsAreClean) {
  RunOutcome out;
  FactStore f;
  f.set("r", ints({1, 2}));
  out.result = f;
  EXPECT_FALSE(check_discrepancy(ints({1, 2}), out, "r"));
  auto rep = check_discrepancy(ints({1, 3}), out, "r");
  ASSERT_TRUE(rep);
  EXPECT_EQ(rep->diff.only_in_a, ints({3}));
  EXPECT_EQ(rep->diff.only_in_b, ints({2}));
}
