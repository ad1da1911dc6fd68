#include "deopt/oracle.hpp"

#include <algorithm>

namespace deopt {

TupleSet StableFacts::view_for(const Program& program, const std::string& rel,
                               const std::set<RuleId>& excluded) const {
  TupleSet out = edb.get(rel);
  for (const auto& r : program.rules) {
    if (r.head.relation != rel || excluded.count(r.id)) continue;
    auto it = per_rule.find(r.id);
    if (it != per_rule.end()) out.insert(it->second.begin(), it->second.end());
  }
  return out;
}

Program build_reference_program(const Program& program, const std::vector<RuleId>& rules,
                                const StableFacts& stable) {
  Program ref;
  std::set<RuleId> ids(rules.begin(), rules.end());
  std::set<std::string> mentioned, heads, inputs;
  for (RuleId id : ids) {
    const Rule* r = program.find_rule(id);
    if (!r) continue;
    ref.rules.push_back(*r);
    heads.insert(r->head.relation);
    mentioned.insert(r->head.relation);
    for (const auto& rel : body_relations(*r)) {
      inputs.insert(rel);
      mentioned.insert(rel);
    }
  }
  for (const auto& d : program.decls)
    if (mentioned.count(d.name)) ref.decls.push_back(d);
  for (const auto& rel : inputs) ref.edb.set(rel, stable.view_for(program, rel, ids));
  for (const auto& s : program.subsumptions)
    if (heads.count(s.relation)) ref.subsumptions.push_back(s);
  ref.outputs.assign(heads.begin(), heads.end());
  return ref;
}

namespace {

OracleError failure_from(RunOutcome outcome, std::vector<RuleId> rules) {
  OracleError e;
  e.kind = outcome.expected_error() ? OracleErrorKind::ExpectedError : OracleErrorKind::EngineFailure;
  e.message = outcome.describe();
  e.rules = std::move(rules);
  e.outcome = std::move(outcome);
  return e;
}

RunOutcome run_reference(const Program& ref, EngineAdapter& engine, OracleStats* stats) {
  auto outcome = engine.run(ref, Role::Reference);
  if (stats) {
    ++stats->reference_runs;
    stats->reference_time_s += outcome.elapsed_s;
  }
  return outcome;
}

}  // namespace

std::variant<FactStore, OracleError> gen_prog_and_exec(const Program& program, const std::vector<RuleId>& rules,
                                                       const StableFacts& stable, EngineAdapter& engine,
                                                       OracleStats* stats) {
  auto ref = build_reference_program(program, rules, stable);
  auto outcome = run_reference(ref, engine, stats);
  if (!outcome.has_facts()) return failure_from(std::move(outcome), rules);
  return std::move(std::get<FactStore>(outcome.result));
}

std::optional<OracleError> handle_recursion(const Program& program, const CondensedNode& node,
                                            StableFacts& stable, EngineAdapter& engine, const OracleConfig& cfg,
                                            OracleStats* stats) {
  auto head_of = [&](RuleId id) { return program.find_rule(id)->head.relation; };

  if (node.has_negative_internal_edge) {
    auto res = gen_prog_and_exec(program, node.members, stable, engine, stats);
    if (auto* err = std::get_if<OracleError>(&res)) return std::move(*err);
    const auto& facts = std::get<FactStore>(res);
    for (RuleId id : node.members) stable.per_rule[id] = facts.get(head_of(id));
    return std::nullopt;
  }

  for (std::size_t round = 1; round <= cfg.max_iter; ++round) {
    bool changed = false;
    for (RuleId id : node.members) {
      auto res = gen_prog_and_exec(program, {id}, stable, engine, stats);
      if (auto* err = std::get_if<OracleError>(&res)) return std::move(*err);
      auto& slot = stable.per_rule[id];
      auto fresh = std::get<FactStore>(res).get(head_of(id));
      if (fresh != slot) {
        slot = std::move(fresh);
        changed = true;
      }
    }
    if (stats) stats->recursion_rounds = round;
    if (!changed) return std::nullopt;
  }
  OracleError e;
  e.kind = OracleErrorKind::MaxIterExceeded;
  e.rules = node.members;
  e.message = "no fixpoint after " + std::to_string(cfg.max_iter) + " rounds";
  return e;
}

std::variant<TupleSet, OracleError> get_facts(const Program& program, const StableFacts& stable,
                                              const std::string& output_rel, EngineAdapter& engine,
                                              OracleStats* stats) {
  TupleSet out = stable.edb.get(output_rel);
  std::size_t sources = out.empty() ? 0 : 1;
  for (const auto& r : program.rules) {
    if (r.head.relation != output_rel) continue;
    auto it = stable.per_rule.find(r.id);
    if (it == stable.per_rule.end() || it->second.empty()) continue;
    out.insert(it->second.begin(), it->second.end());
    ++sources;
  }
  if (sources < 2 || !program.has_subsumption(output_rel)) return out;

  Program merge;
  if (const auto* d = program.find_decl(output_rel)) merge.decls.push_back(*d);
  merge.edb.set(output_rel, std::move(out));
  for (const auto& s : program.subsumptions)
    if (s.relation == output_rel) merge.subsumptions.push_back(s);
  merge.outputs = {output_rel};
  auto outcome = run_reference(merge, engine, stats);
  if (!outcome.has_facts()) return failure_from(std::move(outcome), {});
  return outcome.facts().get(output_rel);
}

std::variant<TupleSet, OracleError> test_oracle_gen(const Program& program, const PrecedenceGraph& subgraph,
                                                    StableFacts& stable, const std::string& output_rel,
                                                    EngineAdapter& engine, const OracleConfig& cfg,
                                                    OracleStats* stats) {
  for (RuleId id : subgraph.nodes) stable.per_rule.erase(id);
  auto strat = graph_stratify(subgraph);
  for (const auto& stratum : strat.strata) {
    for (std::size_t idx : stratum) {
      const auto& node = strat.condensation.nodes[idx];
      if (node.recursive) {
        if (auto err = handle_recursion(program, node, stable, engine, cfg, stats)) return std::move(*err);
        continue;
      }
      RuleId id = node.members.front();
      auto res = gen_prog_and_exec(program, {id}, stable, engine, stats);
      if (auto* err = std::get_if<OracleError>(&res)) return std::move(*err);
      stable.per_rule[id] = std::get<FactStore>(res).get(program.find_rule(id)->head.relation);
    }
  }
  return get_facts(program, stable, output_rel, engine, stats);
}

std::variant<TupleSet, OracleError> full_oracle(const Program& program, EngineAdapter& engine,
                                                const OracleConfig& cfg, StableFacts* stable_out,
                                                OracleStats* stats) {
  StableFacts stable;
  stable.edb = program.edb;
  auto res = test_oracle_gen(program, build_graph(program), stable, program.output_rel(), engine, cfg, stats);
  if (stable_out) *stable_out = std::move(stable);
  return res;
}

}  // namespace deopt
