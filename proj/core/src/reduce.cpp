#include "deopt/reduce.hpp"

#include "deopt/safety.hpp"

namespace deopt {

bool shows_logic_bug(const Program& program, EngineAdapter& engine, const OracleConfig& cfg) {
  if (program.outputs.empty() || validate_program(program)) return false;
  if (std::holds_alternative<std::string>(relation_levels(program))) return false;
  auto oracle = full_oracle(program, engine, cfg);
  if (!std::holds_alternative<TupleSet>(oracle)) return false;
  auto out = engine.run(program, Role::Optimized);
  auto rep = check_discrepancy(std::get<TupleSet>(oracle), out, program.output_rel());
  return rep && rep->kind == BugKind::Logic;
}

namespace {

bool defines(const Program& p, const std::string& rel) {
  for (const auto& r : p.rules)
    if (r.head.relation == rel) return true;
  return false;
}

// Drops declarations, facts and subsumption rules nothing refers to.
Program prune_unused(const Program& p) {
  std::set<std::string> used(p.outputs.begin(), p.outputs.end());
  for (const auto& r : p.rules) {
    used.insert(r.head.relation);
    for (const auto& rel : body_relations(r)) used.insert(rel);
  }
  Program out = p;
  out.decls.clear();
  for (const auto& d : p.decls)
    if (used.count(d.name)) out.decls.push_back(d);
  out.edb = FactStore{};
  for (const auto& [rel, tuples] : p.edb)
    if (used.count(rel)) out.edb.set(rel, tuples);
  out.subsumptions.clear();
  for (const auto& s : p.subsumptions)
    if (used.count(s.relation)) out.subsumptions.push_back(s);
  return out;
}

Program dependency_closure(const Program& p) {
  std::set<std::string> needed(p.outputs.begin(), p.outputs.end());
  for (bool grew = true; grew;) {
    grew = false;
    for (const auto& r : p.rules) {
      if (!needed.count(r.head.relation)) continue;
      for (const auto& rel : body_relations(r)) grew |= needed.insert(rel).second;
    }
  }
  Program out = p;
  out.rules.clear();
  for (const auto& r : p.rules)
    if (needed.count(r.head.relation)) out.rules.push_back(r);
  return prune_unused(out);
}

}  // namespace

ReduceResult reduce_program(const Program& program, EngineAdapter& engine, const OracleConfig& cfg) {
  ReduceResult res;
  res.program = program;
  auto test = [&](const Program& p) {
    ++res.checks;
    return shows_logic_bug(p, engine, cfg);
  };
  if (!test(program)) return res;
  res.reproducible = true;
  Program& cur = res.program;

  if (auto closed = dependency_closure(cur); closed.rules.size() < cur.rules.size() && test(closed)) cur = closed;

  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = cur.rules.size(); i-- > 0;) {
      Program cand = cur;
      cand.rules.erase(cand.rules.begin() + static_cast<std::ptrdiff_t>(i));
      if (!defines(cand, cand.output_rel())) continue;
      cand = prune_unused(cand);
      if (test(cand)) {
        cur = std::move(cand);
        changed = true;
      }
    }
  }

  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i < cur.rules.size(); ++i) {
      for (std::size_t j = cur.rules[i].body.size(); j-- > 0;) {
        if (cur.rules[i].body.size() <= 1) break;
        Program cand = cur;
        auto& body = cand.rules[i].body;
        body.erase(body.begin() + static_cast<std::ptrdiff_t>(j));
        if (check_safety(cand.rules[i]) || !plan_body(cand.rules[i])) continue;
        cand = prune_unused(cand);
        if (test(cand)) {
          cur = std::move(cand);
          changed = true;
        }
      }
    }
  }

  std::vector<std::string> rels;
  for (const auto& [rel, tuples] : cur.edb) rels.push_back(rel);
  for (const auto& rel : rels) {
    std::vector<Tuple> tuples(cur.edb.get(rel).begin(), cur.edb.get(rel).end());
    for (const auto& t : tuples) {
      Program cand = cur;
      cand.edb.ensure(rel).erase(t);
      if (test(cand)) cur = std::move(cand);
    }
  }
  return res;
}

ReduceResult reduce_testcase(const BugReport& report, EngineAdapter& engine, const OracleConfig& cfg) {
  if (report.kind != BugKind::Logic) {
    ReduceResult res;
    res.program = report.program;
    return res;
  }
  return reduce_program(report.program, engine, cfg);
}

}  // namespace deopt
