#include <algorithm>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include "deopt/engine.hpp"
#include "deopt/safety.hpp"

namespace deopt {

namespace {

struct LimitHit {
  std::string what;
};

struct CTerm {
  Term::Tag tag = Term::Tag::Wildcard;
  int slot = -1;
  Value value;
  ArithOp op = ArithOp::Add;
  std::vector<CTerm> args;
};

Value eval_c(const CTerm& t, const std::vector<Value>& slots) {
  switch (t.tag) {
    case Term::Tag::Const: return t.value;
    case Term::Tag::Var: return slots[static_cast<std::size_t>(t.slot)];
    case Term::Tag::Arith:
      if (t.op == ArithOp::Neg) return apply_neg(eval_c(t.args[0], slots));
      return apply_arith(t.op, eval_c(t.args[0], slots), eval_c(t.args[1], slots));
    case Term::Tag::Wildcard: break;
  }
  throw SemanticError(SemanticErrorKind::UnboundVariable, "wildcard in expression");
}

struct Index {
  std::unordered_map<Tuple, std::vector<std::uint32_t>, TupleHash> map;
  std::size_t upto = 0;
};

struct Rel {
  std::string name;
  std::vector<Tuple> rows;
  std::vector<char> alive;
  std::unordered_set<Tuple, TupleHash> members;
  std::map<std::vector<std::size_t>, Index> indexes;
  std::vector<const SubsumptionRule*> subs;
  int level = 0;
  std::size_t rule_count = 0;
  std::size_t first_rule = 0;

  void append(Tuple t) {
    members.insert(t);
    rows.push_back(std::move(t));
    alive.push_back(1);
  }

  const std::vector<std::uint32_t>* lookup(const std::vector<std::size_t>& cols, const Tuple& key) {
    Index& ix = indexes[cols];
    for (; ix.upto < rows.size(); ++ix.upto) {
      Tuple k;
      k.reserve(cols.size());
      for (auto c : cols) k.push_back(rows[ix.upto][c]);
      ix.map[std::move(k)].push_back(static_cast<std::uint32_t>(ix.upto));
    }
    auto it = ix.map.find(key);
    return it == ix.map.end() ? nullptr : &it->second;
  }
};

struct KeyCol {
  std::size_t col;
  CTerm term;
};

struct Step {
  enum class Kind { Scan, Negation, Filter } kind = Kind::Filter;
  int rel = -1;
  std::vector<KeyCol> keys;                          // evaluated before the lookup
  std::vector<std::size_t> key_cols;                 // columns of `keys`
  std::vector<std::pair<std::size_t, int>> binds;    // column -> slot
  std::vector<KeyCol> checks;                        // compared after binding
  CmpOp op = CmpOp::Eq;
  CTerm lhs, rhs;
  bool range_scan = false;
};

struct CRule {
  const Rule* source = nullptr;
  std::size_t index = 0;
  int head_rel = -1;
  std::vector<CTerm> head;
  std::vector<Step> steps;
  std::size_t slot_count = 0;
  std::vector<std::size_t> same_level_scans;  // step indices
};

class Compiler {
 public:
  explicit Compiler(std::map<std::string, int>& rel_ids) : rel_ids_(rel_ids) {}

  CRule compile(const Rule& rule, const BodyPlan& plan) {
    CRule cr;
    cr.source = &rule;
    slots_.clear();
    cr.head_rel = rel_ids_.at(rule.head.relation);
    std::set<std::string> bound;
    for (auto bi : plan.order) {
      const Literal& lit = rule.body[bi];
      Step st;
      if (const auto* c = as_constraint(lit)) {
        st.kind = Step::Kind::Filter;
        st.op = c->op;
        st.lhs = term(c->lhs);
        st.rhs = term(c->rhs);
        st.range_scan = c->range_scan;
        cr.steps.push_back(std::move(st));
        continue;
      }
      const Atom& a = std::get<Atom>(lit);
      st.kind = a.negated ? Step::Kind::Negation : Step::Kind::Scan;
      st.rel = rel_ids_.at(a.relation);
      std::set<std::string> local;
      for (std::size_t k = 0; k < a.args.size(); ++k) {
        const Term& t = a.args[k];
        if (t.is_wildcard()) continue;
        bool ready = !t.is_arith();
        for (const auto& v : var_set(t))
          if (!bound.count(v)) ready = false;
        if (ready) {
          st.keys.push_back({k, term(t)});
          st.key_cols.push_back(k);
        } else if (t.is_var() && !local.count(t.name)) {
          local.insert(t.name);
          st.binds.push_back({k, slot(t.name)});
        } else if (t.is_var()) {
          st.checks.push_back({k, CTerm{}});
        }
      }
      // Arithmetic arguments are evaluated last, only for rows that match
      // every plain column.
      for (std::size_t k = 0; k < a.args.size(); ++k)
        if (a.args[k].is_arith()) st.checks.push_back({k, CTerm{}});
      // Checks refer to slots that exist only once binds are registered.
      for (auto& chk : st.checks) chk.term = term(a.args[chk.col]);
      bound.insert(local.begin(), local.end());
      cr.steps.push_back(std::move(st));
    }
    for (const auto& t : rule.head.args) cr.head.push_back(term(t));
    cr.slot_count = slots_.size();
    return cr;
  }

 private:
  int slot(const std::string& v) {
    auto [it, fresh] = slots_.emplace(v, static_cast<int>(slots_.size()));
    return it->second;
  }

  CTerm term(const Term& t) {
    CTerm c;
    c.tag = t.tag;
    switch (t.tag) {
      case Term::Tag::Var: c.slot = slot(t.name); break;
      case Term::Tag::Const: c.value = t.value; break;
      case Term::Tag::Arith:
        c.op = t.op;
        for (const auto& a : t.args) c.args.push_back(term(a));
        break;
      case Term::Tag::Wildcard: break;
    }
    return c;
  }

  std::map<std::string, int>& rel_ids_;
  std::map<std::string, int> slots_;
};

struct Pending {
  std::vector<Tuple> tuples;
  std::vector<std::size_t> rule_of;
  std::unordered_set<Tuple, TupleHash> seen;
};

class Evaluator {
 public:
  Evaluator(std::vector<Rel>& rels, const OptConfig& opt, const EvalLimits& limits, bool magic_fired)
      : rels_(rels), opt_(opt), limits_(limits), magic_fired_(magic_fired) {}

  void run_level(int level, std::vector<CRule>& rules) {
    std::vector<CRule*> active;
    for (auto& r : rules)
      if (rels_[static_cast<std::size_t>(r.head_rel)].level == level) active.push_back(&r);
    if (active.empty()) {
      prune_level(level);
      return;
    }
    for (auto* r : active) {
      r->same_level_scans.clear();
      for (std::size_t i = 0; i < r->steps.size(); ++i) {
        const auto& st = r->steps[i];
        if (st.kind == Step::Kind::Scan && rels_[static_cast<std::size_t>(st.rel)].level == level)
          r->same_level_scans.push_back(i);
      }
    }

    deltas_.assign(rels_.size(), {});
    bool first = true;
    for (;;) {
      std::map<int, Pending> pending;
      for (auto* r : active) {
        if (first) {
          fire(*r, SIZE_MAX, pending);
          continue;
        }
        for (auto si : r->same_level_scans)
          if (!deltas_[static_cast<std::size_t>(r->steps[si].rel)].empty()) fire(*r, si, pending);
      }
      first = false;
      ++rounds;

      std::vector<std::vector<std::uint32_t>> next(rels_.size());
      bool any = false;
      for (auto& [rid, pend] : pending) {
        Rel& rel = rels_[static_cast<std::size_t>(rid)];
        bool shared_delta_broken = opt_.has_bug(BugId::SeminaiveDelta) && rel.rule_count >= 2;
        for (std::size_t i = 0; i < pend.tuples.size(); ++i) {
          auto row = static_cast<std::uint32_t>(rel.rows.size());
          rel.append(std::move(pend.tuples[i]));
          if (shared_delta_broken && pend.rule_of[i] != rel.first_rule) continue;
          next[static_cast<std::size_t>(rid)].push_back(row);
          any = true;
        }
      }
      deltas_ = std::move(next);
      if (opt_.enable_subsumption) prune_level(level);
      if (!any) break;
    }
    prune_level(level);
  }

  std::size_t rounds = 0;
  std::uint64_t bindings = 0;

 private:
  void prune_level(int level) {
    if (opt_.has_bug(BugId::SubsumeUnderMagic) && magic_fired_) return;
    for (auto& rel : rels_) {
      if (rel.level != level || rel.subs.empty()) continue;
      TupleSet all(rel.members.begin(), rel.members.end());
      TupleSet keep = apply_subsumptions(all, rel.subs);
      for (std::size_t i = 0; i < rel.rows.size(); ++i)
        if (rel.alive[i] && !keep.count(rel.rows[i])) rel.alive[i] = 0;
    }
  }

  void fire(const CRule& r, std::size_t delta_step, std::map<int, Pending>& pending) {
    std::vector<Value> slots(r.slot_count);
    Pending& out = pending[r.head_rel];
    Rel& head = rels_[static_cast<std::size_t>(r.head_rel)];
    run(r, 0, delta_step, slots, out, head);
  }

  bool compare(const Step& st, const std::vector<Value>& slots) {
    Value a = eval_c(st.lhs, slots);
    Value b = eval_c(st.rhs, slots);
    if (st.range_scan && opt_.has_bug(BugId::MagicNegZero)) return compare_numeric(st.op, a, b);
    return compare_values(st.op, a, b);
  }

  bool row_matches(const Step& st, const Tuple& row, std::vector<Value>& slots, bool keys_checked) {
    if (!keys_checked)
      for (const auto& k : st.keys)
        if (!(eval_c(k.term, slots) == row[k.col])) return false;
    for (const auto& [col, s] : st.binds) slots[static_cast<std::size_t>(s)] = row[col];
    for (const auto& chk : st.checks)
      if (!(eval_c(chk.term, slots) == row[chk.col])) return false;
    return true;
  }

  void run(const CRule& r, std::size_t pos, std::size_t delta_step, std::vector<Value>& slots, Pending& out,
           Rel& head) {
    if (pos == r.steps.size()) {
      Tuple t;
      t.reserve(r.head.size());
      for (const auto& h : r.head) t.push_back(eval_c(h, slots));
      if (head.members.count(t) || out.seen.count(t)) return;
      if (head.members.size() + out.tuples.size() + 1 > limits_.max_tuples_per_relation)
        throw LimitHit{"relation " + head.name + " exceeds the tuple limit"};
      out.seen.insert(t);
      out.tuples.push_back(std::move(t));
      out.rule_of.push_back(r.index);
      return;
    }
    const Step& st = r.steps[pos];
    if (st.kind == Step::Kind::Filter) {
      if (compare(st, slots)) run(r, pos + 1, delta_step, slots, out, head);
      return;
    }
    Rel& rel = rels_[static_cast<std::size_t>(st.rel)];
    if (st.kind == Step::Kind::Negation) {
      if (!exists(rel, st, slots)) run(r, pos + 1, delta_step, slots, out, head);
      return;
    }
    auto visit = [&](std::uint32_t id, bool keys_checked) {
      if (++bindings > limits_.max_bindings) throw LimitHit{"binding budget exhausted"};
      if (!rel.alive[id]) return;
      if (row_matches(st, rel.rows[id], slots, keys_checked)) run(r, pos + 1, delta_step, slots, out, head);
    };
    if (pos == delta_step) {
      const auto& delta = deltas_[static_cast<std::size_t>(st.rel)];
      for (auto id : delta) visit(id, false);
      return;
    }
    const std::size_t visible = rel.rows.size();
    if (st.keys.empty()) {
      for (std::size_t id = 0; id < visible; ++id) visit(static_cast<std::uint32_t>(id), true);
      return;
    }
    Tuple key;
    key.reserve(st.keys.size());
    for (const auto& k : st.keys) key.push_back(eval_c(k.term, slots));
    const auto* ids = rel.lookup(st.key_cols, key);
    if (!ids) return;
    for (auto id : *ids) visit(id, true);
  }

  bool exists(Rel& rel, const Step& st, std::vector<Value>& slots) {
    Tuple key;
    key.reserve(st.keys.size());
    for (const auto& k : st.keys) key.push_back(eval_c(k.term, slots));
    const auto* ids = rel.lookup(st.key_cols, key);
    if (!ids) return false;
    for (auto id : *ids)
      if (rel.alive[id]) return true;
    return false;
  }

  std::vector<Rel>& rels_;
  const OptConfig& opt_;
  const EvalLimits& limits_;
  bool magic_fired_;
  std::vector<std::vector<std::uint32_t>> deltas_;
};

}  // namespace

EvalResult evaluate(const Program& program, const FactStore& edb, const OptConfig& opt, const EvalLimits& limits,
                    EvalStats* stats) {
  if (auto err = validate_program(program))
    return EvalResult::failure({EngineErrorKind::InvalidProgram, std::nullopt, *err});
  for (const auto& r : program.rules)
    if (auto v = check_safety(r))
      return EvalResult::failure(
          {EngineErrorKind::InvalidProgram, std::nullopt, "unsafe variable " + *v + " in " + format_rule(r)});

  Program p = program;
  p.edb.merge(edb);
  EvalStats local_stats;
  if (opt.inline_active()) {
    auto inl = inline_rewrite(p, opt.has_bug(BugId::InlineDropLiteral));
    local_stats.inlined_relations = inl.inlined.size();
    p = std::move(inl.program);
  }
  if (opt.magic_active()) {
    auto mg = magic_rewrite(p);
    local_stats.magic_fired = mg.fired;
    p = std::move(mg.program);
  }

  auto levels_or = relation_levels(p);
  if (auto* msg = std::get_if<std::string>(&levels_or))
    return EvalResult::failure({EngineErrorKind::Unstratifiable, std::nullopt, *msg});
  const auto& level = std::get<std::map<std::string, int>>(levels_or);

  std::map<std::string, int> rel_ids;
  std::vector<Rel> rels;
  for (const auto& [name, l] : level) {
    rel_ids[name] = static_cast<int>(rels.size());
    Rel r;
    r.name = name;
    r.level = l;
    rels.push_back(std::move(r));
  }
  for (const auto& s : p.subsumptions) rels[static_cast<std::size_t>(rel_ids.at(s.relation))].subs.push_back(&s);
  for (const auto& [name, tuples] : p.edb) {
    Rel& r = rels[static_cast<std::size_t>(rel_ids.at(name))];
    for (const auto& t : tuples) r.append(t);
    if (r.rows.size() > limits.max_tuples_per_relation)
      return EvalResult::failure({EngineErrorKind::ResourceLimit, std::nullopt, "input relation " + name + " too large"});
  }

  std::vector<CRule> crules;
  Compiler compiler(rel_ids);
  for (std::size_t i = 0; i < p.rules.size(); ++i) {
    auto plan = plan_body(p.rules[i]);
    if (!plan)
      return EvalResult::failure(
          {EngineErrorKind::InvalidProgram, std::nullopt, "cannot schedule " + format_rule(p.rules[i])});
    crules.push_back(compiler.compile(p.rules[i], *plan));
    crules.back().index = i;
    Rel& head = rels[static_cast<std::size_t>(crules.back().head_rel)];
    if (head.rule_count++ == 0) head.first_rule = i;
  }

  int max_level = 0;
  for (const auto& [name, l] : level) max_level = std::max(max_level, l);

  Evaluator ev(rels, opt, limits, local_stats.magic_fired);
  try {
    for (int l = 0; l <= max_level; ++l) ev.run_level(l, crules);
  } catch (const SemanticError& e) {
    return EvalResult::failure({EngineErrorKind::Semantic, e.kind(), e.what()});
  } catch (const LimitHit& e) {
    return EvalResult::failure({EngineErrorKind::ResourceLimit, std::nullopt, e.what});
  }
  local_stats.rounds = ev.rounds;
  local_stats.bindings = ev.bindings;
  if (stats) *stats = local_stats;

  FactStore out;
  for (const auto& d : program.decls) {
    auto& dst = out.ensure(d.name);
    auto it = rel_ids.find(d.name);
    if (it == rel_ids.end()) continue;
    const Rel& r = rels[static_cast<std::size_t>(it->second)];
    for (std::size_t i = 0; i < r.rows.size(); ++i)
      if (r.alive[i]) dst.insert(r.rows[i]);
  }
  return EvalResult::success(std::move(out));
}

}  // namespace deopt
