#include "deopt/generator.hpp"

#include <algorithm>

namespace deopt {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Own helpers instead of <random> distributions, whose output differs between
// standard library implementations.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
bool coin(std::mt19937_64& rng, double p) { return p > 0.0 && unit(rng) < p; }
std::size_t below(std::mt19937_64& rng, std::size_t n) { return n == 0 ? 0 : static_cast<std::size_t>(rng() % n); }
std::size_t between(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return hi <= lo ? lo : lo + below(rng, hi - lo + 1);
}
template <class T>
const T& pick(std::mt19937_64& rng, const std::vector<T>& v) {
  return v[below(rng, v.size())];
}

std::vector<std::pair<Kind, double>> allowed_kinds(const GenConfig& cfg) {
  auto f = dialect_features(cfg.dialect);
  std::vector<std::pair<Kind, double>> out = {{Kind::Signed, cfg.kinds.signed_int}};
  if (f.supports_unsigned) out.push_back({Kind::Unsigned, cfg.kinds.unsigned_int});
  if (f.supports_floats) out.push_back({Kind::Float, cfg.kinds.floating});
  if (f.supports_symbols) out.push_back({Kind::Symbol, cfg.kinds.symbol});
  return out;
}

Kind pick_kind(std::mt19937_64& rng, const GenConfig& cfg) {
  auto kinds = allowed_kinds(cfg);
  double total = 0;
  for (const auto& [k, w] : kinds) total += w;
  if (total <= 0) return Kind::Signed;
  double x = unit(rng) * total;
  for (const auto& [k, w] : kinds) {
    if (x < w) return k;
    x -= w;
  }
  return kinds.back().first;
}

Value random_value(std::mt19937_64& rng, const GenConfig& cfg, Kind k) {
  const auto& p = cfg.pools;
  switch (k) {
    case Kind::Signed: {
      auto span = static_cast<std::uint64_t>(p.int_max - p.int_min) + 1;
      return Value::signed_int(p.int_min + static_cast<std::int64_t>(rng() % span));
    }
    case Kind::Unsigned: {
      auto lo = static_cast<std::uint64_t>(std::max<std::int64_t>(p.int_min, 0));
      auto hi = static_cast<std::uint64_t>(std::max<std::int64_t>(p.int_max, 0));
      return Value::unsigned_int(lo + rng() % (hi - lo + 1));
    }
    case Kind::Float: return Value::floating(p.floats.empty() ? 0.0 : pick(rng, p.floats));
    case Kind::Symbol: return Value::symbol(p.symbols.empty() ? "a" : pick(rng, p.symbols));
  }
  return {};
}

std::string fresh_relation_name(TestIterationState& st) {
  static const char* const kSyllables[] = {"ba", "ko", "ri", "zu", "me", "ta", "ne", "po", "li", "sa",
                                           "du", "fe", "gi", "ho", "ja", "xu"};
  for (;;) {
    std::string name;
    for (int i = 0; i < 2; ++i) name += kSyllables[below(st.rng, 16)];
    name += std::to_string(st.next_relation++);
    if (!st.program.find_decl(name)) return name;
  }
}

std::vector<ArithOp> arith_ops(const GenConfig& cfg, Kind k) {
  if (cfg.dialect == Dialect::MuZLike) return {ArithOp::Add, ArithOp::Sub, ArithOp::Mul};
  if (k == Kind::Unsigned) return {ArithOp::Add, ArithOp::Mul, ArithOp::Div, ArithOp::Mod};
  return {ArithOp::Add, ArithOp::Sub, ArithOp::Mul, ArithOp::Div, ArithOp::Mod};
}

struct VarPool {
  std::vector<std::pair<std::string, Kind>> vars;  // binding order
  std::size_t counter = 0;

  std::string fresh(Kind k) {
    std::string name;
    std::size_t n = counter++;
    name = n < 26 ? std::string(1, static_cast<char>('A' + n)) : "V" + std::to_string(n);
    vars.push_back({name, k});
    return name;
  }
  std::vector<std::string> of_kind(Kind k) const {
    std::vector<std::string> out;
    for (const auto& [n, kk] : vars)
      if (kk == k) out.push_back(n);
    return out;
  }
};

// Arithmetic over `base` with a constant or another variable of the same kind.
Term arith_term(std::mt19937_64& rng, const GenConfig& cfg, const Term& base, Kind k, const VarPool& vars) {
  if (cfg.dialect != Dialect::MuZLike && k != Kind::Unsigned && coin(rng, 0.1)) return Term::neg(base);
  auto op = pick(rng, arith_ops(cfg, k));
  auto same = vars.of_kind(k);
  Term other = (!same.empty() && coin(rng, 0.3)) ? Term::var(pick(rng, same)) : Term::constant(random_value(rng, cfg, k));
  return Term::binary(op, base, other);
}

bool numeric(Kind k) { return k != Kind::Symbol; }

}  // namespace

std::uint64_t iteration_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ (0x632be59bd9b4e019ULL * (index + 1)));
}

GenConfig with_bug_features(GenConfig base, BugId bug) {
  auto& f = base.features;
  switch (bug) {
    case BugId::SeminaiveDelta:
      // Needs two rules for one recursive head.
      base.p_head = std::max(base.p_head, 0.2);
      break;
    case BugId::MagicNegZero:
      base.kinds.floating = std::max(base.kinds.floating, 0.8);
      base.pools.floats = {-0.0, 0.0, -0.0, 0.0, 1.0, -1.0};
      f.constraint = std::max(f.constraint, 0.8);
      f.join = std::max(f.join, 0.8);
      break;
    case BugId::SubsumeUnderMagic:
      f.subsumption = std::max(f.subsumption, 0.3);
      f.join = std::max(f.join, 0.8);
      break;
    case BugId::InlineDropLiteral:
      f.annotation = std::max(f.annotation, 0.3);
      f.constraint = std::max(f.constraint, 0.6);
      break;
  }
  return base;
}

std::string_view extend_outcome_name(ExtendOutcome o) {
  switch (o) {
    case ExtendOutcome::Retained: return "retained";
    case ExtendOutcome::DiscardedEmpty: return "discarded_empty";
    case ExtendOutcome::DiscardedError: return "discarded_error";
    case ExtendOutcome::Exhausted: return "exhausted";
    case ExtendOutcome::EngineFailure: return "engine_failure";
  }
  return "?";
}

Program gen_skeleton(const GenConfig& cfg, std::mt19937_64& rng) {
  TestIterationState tmp;
  tmp.rng = rng;
  const auto& sz = cfg.skeleton;
  std::size_t min_arity = sz.min_arity;
  if (min_arity == 0 && !dialect_features(cfg.dialect).supports_zero_arity) min_arity = 1;
  std::size_t n = between(tmp.rng, sz.min_relations, sz.max_relations);
  for (std::size_t i = 0; i < n; ++i) {
    RelationDecl d;
    d.name = fresh_relation_name(tmp);
    std::size_t arity = between(tmp.rng, min_arity, std::max(min_arity, sz.max_arity));
    for (std::size_t a = 0; a < arity; ++a) d.attrs.push_back({"x" + std::to_string(a), pick_kind(tmp.rng, cfg)});
    std::size_t facts = between(tmp.rng, sz.min_facts, sz.max_facts);
    auto& rows = tmp.program.edb.ensure(d.name);
    for (std::size_t f = 0; f < facts; ++f) {
      Tuple t;
      for (const auto& [an, k] : d.attrs) t.push_back(random_value(tmp.rng, cfg, k));
      rows.insert(std::move(t));
    }
    tmp.program.decls.push_back(std::move(d));
  }
  rng = tmp.rng;
  return std::move(tmp.program);
}

TestIterationState make_state(const GenConfig& cfg, std::uint64_t seed) {
  TestIterationState st;
  st.rng.seed(seed);
  st.program = gen_skeleton(cfg, st.rng);
  st.next_relation = st.program.decls.size();
  st.stable.edb = st.program.edb;
  return st;
}

Candidate gen_candidate_rule(TestIterationState& st, const GenConfig& cfg) {
  auto& rng = st.rng;
  const auto& fp = cfg.features;
  auto features = dialect_features(cfg.dialect);
  std::vector<const RelationDecl*> rels;
  for (const auto& d : st.program.decls)
    if (!is_internal_relation(d.name)) rels.push_back(&d);

  Candidate c;
  c.rule.id = st.next_rule_id++;
  VarPool vars;

  // Body first, so that every head variable is bound.
  std::size_t atoms = between(rng, 1, std::max<std::size_t>(1, cfg.max_body_atoms));
  for (int attempt = 0; attempt < 8; ++attempt) {
    c.rule.body.clear();
    vars = {};
    for (std::size_t i = 0; i < atoms; ++i) {
      const auto* d = pick(rng, rels);
      Atom a{d->name, {}, false};
      for (const auto& [an, k] : d->attrs) {
        double x = unit(rng);
        auto same = vars.of_kind(k);
        if (x < fp.constant_arg)
          a.args.push_back(Term::constant(random_value(rng, cfg, k)));
        else if (x < fp.constant_arg + fp.wildcard)
          a.args.push_back(Term::wildcard());
        else if (!same.empty() && coin(rng, fp.join))
          a.args.push_back(Term::var(pick(rng, same)));
        else
          a.args.push_back(Term::var(vars.fresh(k)));
      }
      c.rule.body.push_back(std::move(a));
    }
    if (!vars.vars.empty() || features.supports_zero_arity) break;
  }

  if (coin(rng, fp.negation)) {
    const auto* d = pick(rng, rels);
    Atom a{d->name, {}, true};
    for (const auto& [an, k] : d->attrs) {
      auto same = vars.of_kind(k);
      if (!same.empty() && coin(rng, 0.7))
        a.args.push_back(Term::var(pick(rng, same)));
      else if (coin(rng, 0.5))
        a.args.push_back(Term::wildcard());
      else
        a.args.push_back(Term::constant(random_value(rng, cfg, k)));
    }
    c.rule.body.push_back(std::move(a));
  }

  for (int i = 0; i < 2 && !vars.vars.empty(); ++i) {
    if (!coin(rng, fp.constraint)) continue;
    auto [x, k] = pick(rng, vars.vars);
    Term lhs = Term::var(x);
    if (numeric(k) && coin(rng, fp.arithmetic)) lhs = arith_term(rng, cfg, lhs, k, vars);
    auto same = vars.of_kind(k);
    Term rhs = (same.size() > 1 && coin(rng, 0.5)) ? Term::var(pick(rng, same))
                                                   : Term::constant(random_value(rng, cfg, k));
    auto op = static_cast<CmpOp>(below(rng, 6));
    c.rule.body.push_back(Constraint{op, std::move(lhs), std::move(rhs), false});
  }

  // Head arguments: distinct bound variables, possibly one arithmetic term.
  std::vector<std::pair<std::string, Kind>> pool = vars.vars;
  for (std::size_t i = pool.size(); i > 1; --i) std::swap(pool[i - 1], pool[below(rng, i)]);
  std::size_t arity = pool.empty() ? 0 : between(rng, 1, std::min(cfg.max_head_arity, pool.size()));

  if (coin(rng, cfg.p_head) && !vars.vars.empty()) {
    std::vector<std::pair<const RelationDecl*, std::vector<Term>>> compatible;
    for (const auto* d : rels) {
      if (d->arity() == 0 || st.program.has_subsumption(d->name)) continue;
      std::vector<Term> args;
      for (const auto& [an, k] : d->attrs) {
        auto same = vars.of_kind(k);
        if (same.empty()) break;
        args.push_back(Term::var(pick(rng, same)));
      }
      if (args.size() == d->arity()) compatible.push_back({d, std::move(args)});
    }
    if (!compatible.empty()) {
      auto& [d, args] = compatible[below(rng, compatible.size())];
      c.rule.head = Atom{d->name, std::move(args), false};
      c.existing_head = true;
      return c;
    }
    c.no_compatible_head = true;
  }

  RelationDecl decl;
  decl.name = fresh_relation_name(st);
  for (std::size_t i = 0; i < arity; ++i) {
    c.rule.head.args.push_back(Term::var(pool[i].first));
    decl.attrs.push_back({"y" + std::to_string(i), pool[i].second});
  }
  if (arity > 0 && coin(rng, fp.arithmetic)) {
    std::size_t i = below(rng, arity);
    Kind k = pool[i].second;
    if (numeric(k)) c.rule.head.args[i] = arith_term(rng, cfg, c.rule.head.args[i], k, vars);
  }
  c.rule.head.relation = decl.name;
  if (coin(rng, fp.annotation)) {
    static const std::vector<std::string> kAnnotations = {"magic", "no_magic", "inline", "no_inline"};
    decl.annotations.insert(pick(rng, kAnnotations));
  }
  if (arity > 0 && features.supports_subsumption && coin(rng, fp.subsumption)) {
    SubsumptionRule s;
    s.relation = decl.name;
    std::size_t pos = below(rng, arity);
    for (std::size_t i = 0; i < arity; ++i) {
      if (i == pos) {
        s.dominated.push_back(Term::var("S1"));
        s.dominating.push_back(Term::var("S2"));
      } else {
        auto v = Term::var("K" + std::to_string(i));
        s.dominated.push_back(v);
        s.dominating.push_back(v);
      }
    }
    s.condition.push_back(Constraint{coin(rng, 0.5) ? CmpOp::Lt : CmpOp::Gt, Term::var("S1"), Term::var("S2"), false});
    c.subsumption = std::move(s);
  }
  c.new_decl = std::move(decl);
  return c;
}

namespace {

ExtendResult extend_with(TestIterationState& st, EngineAdapter& engine, const GenConfig& cfg, Candidate cand,
                         bool force) {
  ExtendResult res;
  res.rule = cand.rule.id;
  auto old_outputs = st.program.outputs;
  auto old_graph = st.graph;
  const std::string head = cand.rule.head.relation;

  if (cand.new_decl) st.program.decls.push_back(*cand.new_decl);
  if (cand.subsumption) st.program.subsumptions.push_back(*cand.subsumption);
  add_rule_to_graph(st.graph, st.program, cand.rule);
  st.program.rules.push_back(cand.rule);
  st.program.outputs = {head};

  std::map<RuleId, std::optional<TupleSet>> saved;
  auto rollback = [&] {
    st.program.rules.pop_back();
    if (cand.subsumption) st.program.subsumptions.pop_back();
    if (cand.new_decl) st.program.decls.pop_back();
    st.program.outputs = old_outputs;
    st.graph = std::move(old_graph);
    for (auto& [id, facts] : saved) {
      if (facts)
        st.stable.per_rule[id] = std::move(*facts);
      else
        st.stable.per_rule.erase(id);
    }
  };
  auto record = [&](ExtendOutcome o, std::string code) {
    res.outcome = o;
    res.code = code;
    st.trace.push_back({res.rule, o, std::move(code)});
    return res;
  };

  if (cfg.stratified_only && std::holds_alternative<std::string>(relation_levels(st.program))) {
    rollback();
    return record(ExtendOutcome::DiscardedError, "unstratifiable");
  }

  auto sub = affected_subgraph(st.graph, cand.rule.id);
  for (RuleId id : sub.nodes) {
    auto it = st.stable.per_rule.find(id);
    saved[id] = it == st.stable.per_rule.end() ? std::nullopt : std::optional<TupleSet>(it->second);
  }
  auto oracle = test_oracle_gen(st.program, sub, st.stable, head, engine, OracleConfig{cfg.max_iter}, &st.oracle_stats);
  if (auto* err = std::get_if<OracleError>(&oracle)) {
    rollback();
    switch (err->kind) {
      case OracleErrorKind::ExpectedError: {
        const auto* se = err->outcome.semantic_error();
        return record(ExtendOutcome::DiscardedError, se ? se->code : "error");
      }
      case OracleErrorKind::MaxIterExceeded: return record(ExtendOutcome::DiscardedError, "max_iter");
      case OracleErrorKind::EngineFailure:
        res.failure = std::move(*err);
        return record(ExtendOutcome::EngineFailure, std::string(res.failure->outcome.kind_name()));
    }
  }
  bool empty = st.stable.per_rule[cand.rule.id].empty();
  if (empty && !force && !coin(st.rng, cfg.p_empty)) {
    rollback();
    return record(ExtendOutcome::DiscardedEmpty, {});
  }
  res.oracle = std::move(std::get<TupleSet>(oracle));
  st.attempts_since_success = 0;
  return record(ExtendOutcome::Retained, {});
}

BugReport reference_failure_report(const OracleError& err, const TestIterationState& st, RuleId rule) {
  BugReport r;
  switch (err.outcome.result.index()) {
    case 2: r.kind = BugKind::Crash; break;
    case 3: r.kind = BugKind::Hang; break;
    default: r.kind = BugKind::SemanticErrorUnexpected; break;
  }
  r.phase = "reference";
  r.rule_index = rule;
  r.program = st.program;
  r.stable = st.stable.per_rule;
  r.output_rel = st.program.output_rel();
  r.stdout_text = err.outcome.stdout_text;
  r.stderr_text = err.outcome.stderr_text;
  r.detail = err.message;
  return r;
}

// Runs the optimized program and compares it with `oracle`.
bool check_step(TestIterationState& st, EngineAdapter& engine, IterationTrace& trace, const TupleSet& oracle,
                RuleId rule) {
  auto out = engine.run(st.program, Role::Optimized);
  ++trace.optimized_runs;
  trace.optimized_time_s += out.elapsed_s;
  auto rep = check_discrepancy(oracle, out, st.program.output_rel());
  if (!rep) return false;
  rep->seed = trace.seed;
  rep->iteration = trace.iteration;
  rep->rule_index = rule;
  rep->program = st.program;
  rep->stable = st.stable.per_rule;
  trace.discrepancy_at = st.program.rules.size();
  trace.reports.push_back(std::move(*rep));
  return true;
}

void finish_trace(TestIterationState& st, IterationTrace& trace) {
  trace.rules = st.program.rules.size();
  trace.outcomes = st.trace;
  trace.reference_runs = st.oracle_stats.reference_runs;
  trace.reference_time_s = st.oracle_stats.reference_time_s;
  trace.cycles = cycle_statistics(st.graph);
  trace.program = st.program;
}

}  // namespace

ExtendResult try_extend(TestIterationState& st, EngineAdapter& engine, const GenConfig& cfg) {
  if (cfg.max_att && st.attempts_since_success >= *cfg.max_att) {
    ExtendResult res;
    res.outcome = ExtendOutcome::Exhausted;
    return res;
  }
  ++st.attempts_since_success;
  return extend_with(st, engine, cfg, gen_candidate_rule(st, cfg), false);
}

ExtendResult force_extend(TestIterationState& st, EngineAdapter& engine, const GenConfig& cfg, Candidate cand) {
  return extend_with(st, engine, cfg, std::move(cand), true);
}

IterationTrace run_iteration(const GenConfig& cfg, EngineAdapter& engine, std::uint64_t iteration) {
  IterationTrace trace;
  trace.iteration = iteration;
  trace.seed = iteration_seed(cfg.seed, iteration);
  auto st = make_state(cfg, trace.seed);
  TupleSet last_oracle;
  while (st.program.rules.size() < cfg.max_rules) {
    std::size_t attempts = st.attempts_since_success + 1;
    auto r = try_extend(st, engine, cfg);
    if (r.outcome == ExtendOutcome::Exhausted) {
      trace.exhausted = true;
      break;
    }
    if (r.outcome == ExtendOutcome::EngineFailure) {
      auto rep = reference_failure_report(*r.failure, st, r.rule);
      rep.seed = trace.seed;
      rep.iteration = iteration;
      trace.reports.push_back(std::move(rep));
      break;
    }
    if (r.outcome == ExtendOutcome::DiscardedEmpty) {
      ++trace.discarded_empty;
      continue;
    }
    if (r.outcome == ExtendOutcome::DiscardedError) {
      ++trace.discarded_error;
      continue;
    }
    ++trace.retained;
    trace.attempts.push_back(attempts);
    if (st.stable.per_rule[r.rule].empty()) ++trace.retained_empty;
    last_oracle = r.oracle;
    if (check_step(st, engine, trace, r.oracle, r.rule)) break;
  }
  trace.output_empty = last_oracle.empty();
  finish_trace(st, trace);
  return trace;
}

IterationTrace run_iteration_scripted(const Program& skeleton, const std::vector<Rule>& rules,
                                      EngineAdapter& engine, const GenConfig& cfg) {
  IterationTrace trace;
  TestIterationState st;
  st.rng.seed(cfg.seed);
  st.program = skeleton;
  st.program.rules.clear();
  st.program.outputs.clear();
  st.stable.edb = skeleton.edb;
  st.next_relation = st.program.decls.size();
  TupleSet last_oracle;
  for (const auto& rule : rules) {
    Candidate c;
    c.rule = rule;
    c.rule.id = st.next_rule_id++;
    auto r = force_extend(st, engine, cfg, std::move(c));
    if (r.outcome == ExtendOutcome::EngineFailure) {
      trace.reports.push_back(reference_failure_report(*r.failure, st, r.rule));
      break;
    }
    if (r.outcome != ExtendOutcome::Retained) {
      ++trace.discarded_error;
      continue;
    }
    ++trace.retained;
    last_oracle = r.oracle;
    if (check_step(st, engine, trace, r.oracle, r.rule)) break;
  }
  trace.output_empty = last_oracle.empty();
  finish_trace(st, trace);
  return trace;
}

IterationTrace run_iteration_random(const GenConfig& cfg, EngineAdapter& engine, std::uint64_t iteration) {
  IterationTrace trace;
  trace.random_arm = true;
  trace.iteration = iteration;
  trace.seed = iteration_seed(cfg.seed, iteration);
  auto st = make_state(cfg, trace.seed);
  for (std::size_t guard = 0; st.program.rules.size() < cfg.max_rules && guard < 100 * cfg.max_rules; ++guard) {
    auto c = gen_candidate_rule(st, cfg);
    if (c.new_decl) st.program.decls.push_back(*c.new_decl);
    if (c.subsumption) st.program.subsumptions.push_back(*c.subsumption);
    st.program.rules.push_back(c.rule);
    if (cfg.stratified_only && std::holds_alternative<std::string>(relation_levels(st.program))) {
      st.program.rules.pop_back();
      if (c.subsumption) st.program.subsumptions.pop_back();
      if (c.new_decl) st.program.decls.pop_back();
      continue;
    }
    st.program.rules.pop_back();
    add_rule_to_graph(st.graph, st.program, c.rule);
    st.program.rules.push_back(c.rule);
    st.program.outputs = {c.rule.head.relation};
  }

  auto oracle = full_oracle(st.program, engine, OracleConfig{cfg.max_iter}, &st.stable, &st.oracle_stats);
  if (auto* err = std::get_if<OracleError>(&oracle)) {
    trace.valid = false;
    if (err->kind == OracleErrorKind::EngineFailure) {
      auto rep = reference_failure_report(*err, st, st.program.rules.empty() ? 0 : st.program.rules.back().id);
      rep.seed = trace.seed;
      rep.iteration = iteration;
      trace.reports.push_back(std::move(rep));
    }
    finish_trace(st, trace);
    return trace;
  }
  const auto& expected = std::get<TupleSet>(oracle);
  auto out = engine.run(st.program, Role::Optimized);
  ++trace.optimized_runs;
  trace.optimized_time_s += out.elapsed_s;
  trace.valid = out.has_facts();
  trace.output_empty = !trace.valid || out.facts().get(st.program.output_rel()).empty();
  if (auto rep = check_discrepancy(expected, out, st.program.output_rel())) {
    rep->seed = trace.seed;
    rep->iteration = iteration;
    rep->rule_index = st.program.rules.empty() ? 0 : st.program.rules.back().id;
    rep->program = st.program;
    rep->stable = st.stable.per_rule;
    trace.discrepancy_at = st.program.rules.size();
    trace.reports.push_back(std::move(*rep));
  }
  trace.retained = st.program.rules.size();
  finish_trace(st, trace);
  return trace;
}

}  // namespace deopt
