#include <functional>

#include "deopt/engine.hpp"
#include "deopt/safety.hpp"

namespace deopt {

namespace {

struct LimitHit {
  std::string what;
};

class NaiveRunner {
 public:
  NaiveRunner(const Program& p, FactStore& store, const EvalLimits& limits)
      : program_(p), store_(store), limits_(limits) {}

  void run_rule(const Rule& rule, const BodyPlan& plan, std::vector<Tuple>& out) {
    Binding b;
    step(rule, plan, 0, b, out);
  }

 private:
  bool match(const Atom& atom, const Tuple& t, Binding& b) {
    if (t.size() != atom.args.size()) return false;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const Term& term = atom.args[i];
      if (term.is_const()) {
        if (!(term.value == t[i])) return false;
      } else if (term.is_var()) {
        auto it = b.find(term.name);
        if (it == b.end())
          b.emplace(term.name, t[i]);
        else if (!(it->second == t[i]))
          return false;
      }
    }
    for (std::size_t i = 0; i < t.size(); ++i)
      if (atom.args[i].is_arith() && !(eval_term(atom.args[i], b) == t[i])) return false;
    return true;
  }

  void count_binding() {
    if (++bindings_ > limits_.max_bindings) throw LimitHit{"binding budget exhausted"};
  }

  void step(const Rule& rule, const BodyPlan& plan, std::size_t pos, Binding& b, std::vector<Tuple>& out) {
    if (pos == plan.order.size()) {
      Tuple head;
      head.reserve(rule.head.args.size());
      for (const auto& t : rule.head.args) head.push_back(eval_term(t, b));
      out.push_back(std::move(head));
      return;
    }
    const Literal& lit = rule.body[plan.order[pos]];
    if (const auto* c = as_constraint(lit)) {
      if (compare_values(c->op, eval_term(c->lhs, b), eval_term(c->rhs, b))) step(rule, plan, pos + 1, b, out);
      return;
    }
    const Atom& atom = std::get<Atom>(lit);
    const TupleSet& rel = store_.get(atom.relation);
    if (atom.negated) {
      for (const auto& t : rel) {
        Binding local = b;
        if (match(atom, t, local)) return;
      }
      step(rule, plan, pos + 1, b, out);
      return;
    }
    for (const auto& t : rel) {
      count_binding();
      Binding local = b;
      if (match(atom, t, local)) step(rule, plan, pos + 1, local, out);
    }
  }

  const Program& program_;
  FactStore& store_;
  const EvalLimits& limits_;
  std::uint64_t bindings_ = 0;
};

}  // namespace

EvalResult evaluate_naive(const Program& program, const FactStore& edb, const EvalLimits& limits) {
  if (auto err = validate_program(program))
    return EvalResult::failure({EngineErrorKind::InvalidProgram, std::nullopt, *err});

  std::vector<BodyPlan> plans;
  for (const auto& r : program.rules) {
    auto plan = plan_body(r);
    if (!plan)
      return EvalResult::failure(
          {EngineErrorKind::InvalidProgram, std::nullopt, "unsafe rule: " + format_rule(r)});
    plans.push_back(std::move(*plan));
  }

  auto levels_or = relation_levels(program);
  if (auto* msg = std::get_if<std::string>(&levels_or))
    return EvalResult::failure({EngineErrorKind::Unstratifiable, std::nullopt, *msg});
  const auto& level = std::get<std::map<std::string, int>>(levels_or);
  int max_level = 0;
  for (const auto& [rel, l] : level) max_level = std::max(max_level, l);

  FactStore store = program.edb;
  store.merge(edb);
  for (const auto& d : program.decls) store.ensure(d.name);

  NaiveRunner runner(program, store, limits);
  try {
    for (int l = 0; l <= max_level; ++l) {
      bool changed = true;
      while (changed) {
        changed = false;
        for (std::size_t i = 0; i < program.rules.size(); ++i) {
          const Rule& r = program.rules[i];
          if (level.at(r.head.relation) != l) continue;
          std::vector<Tuple> derived;
          runner.run_rule(r, plans[i], derived);
          for (auto& t : derived)
            if (store.insert(r.head.relation, std::move(t))) changed = true;
          if (store.size(r.head.relation) > limits.max_tuples_per_relation)
            throw LimitHit{"relation " + r.head.relation + " exceeds the tuple limit"};
        }
      }
      for (const auto& d : program.decls) {
        if (level.at(d.name) != l || !program.has_subsumption(d.name)) continue;
        std::vector<const SubsumptionRule*> subs;
        for (const auto& s : program.subsumptions)
          if (s.relation == d.name) subs.push_back(&s);
        store.set(d.name, apply_subsumptions(store.get(d.name), subs));
      }
    }
  } catch (const SemanticError& e) {
    return EvalResult::failure({EngineErrorKind::Semantic, e.kind(), e.what()});
  } catch (const LimitHit& e) {
    return EvalResult::failure({EngineErrorKind::ResourceLimit, std::nullopt, e.what});
  }
  return EvalResult::success(std::move(store));
}

}  // namespace deopt
