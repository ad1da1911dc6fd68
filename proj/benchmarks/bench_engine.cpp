#include <benchmark/benchmark.h>

#include "deopt/engine.hpp"
#include "deopt/generator.hpp"
#include "deopt/oracle.hpp"

using namespace deopt;

namespace {

// edge over a chain of n nodes and its transitive closure.
Program chain_closure(std::int64_t n) {
  Program p;
  p.decls.push_back({"edge", {{"x", Kind::Signed}, {"y", Kind::Signed}}, {}});
  p.decls.push_back({"path", {{"x", Kind::Signed}, {"y", Kind::Signed}}, {}});
  for (std::int64_t i = 0; i + 1 < n; ++i) p.edb.insert("edge", {Value::signed_int(i), Value::signed_int(i + 1)});
  auto X = Term::var("X"), Y = Term::var("Y"), Z = Term::var("Z");
  p.rules.push_back({0, Atom{"path", {X, Y}}, {Atom{"edge", {X, Y}}}});
  p.rules.push_back({1, Atom{"path", {X, Z}}, {Atom{"path", {X, Y}}, Atom{"edge", {Y, Z}}}});
  p.outputs = {"path"};
  return p;
}

void BM_SemiNaiveClosure(benchmark::State& state) {
  auto p = chain_closure(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(evaluate(p, p.edb, OptConfig{}));
}
BENCHMARK(BM_SemiNaiveClosure)->Arg(16)->Arg(64)->Arg(128);

void BM_NaiveClosure(benchmark::State& state) {
  auto p = chain_closure(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_naive(p, p.edb));
}
BENCHMARK(BM_NaiveClosure)->Arg(16)->Arg(64);

void BM_FullOracle(benchmark::State& state) {
  auto p = chain_closure(state.range(0));
  EmbeddedAdapter engine{OptConfig{}};
  for (auto _ : state) benchmark::DoNotOptimize(full_oracle(p, engine, {}));
}
BENCHMARK(BM_FullOracle)->Arg(16)->Arg(64);

// One incremental test iteration, bug-free engine.
void BM_Iteration(benchmark::State& state) {
  GenConfig cfg;
  cfg.seed = 1;
  cfg.max_rules = static_cast<std::size_t>(state.range(0));
  EmbeddedAdapter engine{OptConfig{}};
  std::uint64_t it = 0;
  for (auto _ : state) benchmark::DoNotOptimize(run_iteration(cfg, engine, it++));
}
BENCHMARK(BM_Iteration)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

void BM_RandomIteration(benchmark::State& state) {
  GenConfig cfg;
  cfg.seed = 1;
  cfg.max_rules = static_cast<std::size_t>(state.range(0));
  EmbeddedAdapter engine{OptConfig{}};
  std::uint64_t it = 0;
  for (auto _ : state) benchmark::DoNotOptimize(run_iteration_random(cfg, engine, it++));
}
BENCHMARK(BM_RandomIteration)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
