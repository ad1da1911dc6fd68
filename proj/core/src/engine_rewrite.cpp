#include <algorithm>
#include <map>

#include "deopt/engine.hpp"
#include "deopt/safety.hpp"

namespace deopt {

namespace {

// body relation -> head relations
using DepGraph = std::map<std::string, std::set<std::string>>;

DepGraph dependency_graph(const Program& p) {
  DepGraph g;
  for (const auto& r : p.rules)
    for (const auto& rel : body_relations(r)) g[rel].insert(r.head.relation);
  return g;
}

bool reaches(const DepGraph& g, const std::string& from, const std::string& to) {
  std::set<std::string> seen;
  std::vector<std::string> stack{from};
  while (!stack.empty()) {
    auto cur = stack.back();
    stack.pop_back();
    auto it = g.find(cur);
    if (it == g.end()) continue;
    for (const auto& nxt : it->second) {
      if (nxt == to) return true;
      if (seen.insert(nxt).second) stack.push_back(nxt);
    }
  }
  return false;
}

bool negated_anywhere(const Program& p, const std::string& rel) {
  for (const auto& r : p.rules)
    for (const auto& l : r.body)
      if (const auto* a = as_atom(l); a && a->negated && a->relation == rel) return true;
  return false;
}

bool can_fail(const Term& t) {
  return term_uses_op(t, ArithOp::Div) || term_uses_op(t, ArithOp::Mod) || term_uses_op(t, ArithOp::Pow);
}

bool rule_can_fail(const Rule& r) {
  for (const auto& t : r.head.args)
    if (can_fail(t)) return true;
  for (const auto& l : r.body) {
    if (const auto* a = as_atom(l)) {
      for (const auto& t : a->args)
        if (can_fail(t)) return true;
    } else {
      const auto& c = std::get<Constraint>(l);
      if (can_fail(c.lhs) || can_fail(c.rhs)) return true;
    }
  }
  return false;
}

std::vector<std::size_t> rules_defining(const Program& p, const std::string& rel) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < p.rules.size(); ++i)
    if (p.rules[i].head.relation == rel) out.push_back(i);
  return out;
}

bool is_plain_atom(const Atom& a) {
  for (const auto& t : a.args)
    if (t.is_arith()) return false;
  return true;
}

std::string unique_relation_name(const Program& p, const std::string& base) {
  std::string name = base;
  for (int i = 1; p.find_decl(name); ++i) name = base + "_" + std::to_string(i);
  return name;
}

struct Occurrence {
  std::size_t rule;
  std::size_t literal;
};

}  // namespace

MagicResult magic_rewrite(const Program& program) {
  MagicResult res{program, false, {}};
  Program& p = res.program;
  if (p.outputs.empty()) return res;

  std::vector<std::string> order;
  for (const auto& d : program.decls) order.push_back(d.name);

  for (const auto& h : order) {
    const auto* decl = p.find_decl(h);
    if (!decl || decl->arity() == 0 || is_internal_relation(h)) continue;
    if (p.is_output(h) || p.edb.contains(h) || p.has_subsumption(h)) continue;
    if (decl->has_annotation("no_magic")) continue;
    auto defs = rules_defining(p, h);
    if (defs.empty() || negated_anywhere(p, h)) continue;
    DepGraph g = dependency_graph(p);
    if (reaches(g, h, h)) continue;

    std::vector<Occurrence> occs;
    for (std::size_t ri = 0; ri < p.rules.size(); ++ri)
      for (std::size_t li = 0; li < p.rules[ri].body.size(); ++li)
        if (const auto* a = as_atom(p.rules[ri].body[li]); a && a->relation == h) occs.push_back({ri, li});
    if (occs.empty()) continue;

    // Positions bound at every occurrence, and the sideways prefix of each.
    std::set<std::size_t> positions;
    for (std::size_t k = 0; k < decl->arity(); ++k) positions.insert(k);
    std::vector<std::vector<Atom>> prefixes;
    bool ok = true;
    for (const auto& occ : occs) {
      const Rule& r = p.rules[occ.rule];
      std::vector<Atom> prefix;
      std::set<std::string> bound;
      for (std::size_t li = 0; li < occ.literal; ++li) {
        const auto* a = as_atom(r.body[li]);
        if (!a || a->negated || !is_plain_atom(*a) || a->relation == h) continue;
        if (reaches(g, h, a->relation)) {
          ok = false;
          break;
        }
        prefix.push_back(*a);
        for (const auto& t : a->args)
          if (t.is_var()) bound.insert(t.name);
      }
      if (!ok) break;
      const auto& atom = std::get<Atom>(r.body[occ.literal]);
      std::set<std::size_t> here;
      for (std::size_t k = 0; k < atom.args.size(); ++k) {
        const Term& t = atom.args[k];
        if (t.is_const() || (t.is_var() && bound.count(t.name))) here.insert(k);
      }
      std::set<std::size_t> keep;
      std::set_intersection(positions.begin(), positions.end(), here.begin(), here.end(),
                            std::inserter(keep, keep.end()));
      positions = std::move(keep);
      prefixes.push_back(std::move(prefix));
    }
    if (!ok || positions.empty()) continue;

    RelationDecl mdecl;
    mdecl.name = unique_relation_name(p, std::string(kInternalPrefix) + "m_" + h);
    for (auto k : positions) mdecl.attrs.push_back({"a" + std::to_string(k), decl->attrs[k].second});

    std::vector<Rule> demand_rules;
    for (std::size_t oi = 0; oi < occs.size(); ++oi) {
      const auto& atom = std::get<Atom>(p.rules[occs[oi].rule].body[occs[oi].literal]);
      Rule dr;
      dr.head.relation = mdecl.name;
      for (auto k : positions) dr.head.args.push_back(atom.args[k]);
      for (const auto& a : prefixes[oi]) dr.body.push_back(a);
      // A demand fact from constants alone still needs a positive atom.
      if (dr.body.empty()) continue;
      demand_rules.push_back(std::move(dr));
    }
    // Occurrences bound purely by constants contribute seed facts instead.
    FactStore seeds;
    for (std::size_t oi = 0; oi < occs.size(); ++oi) {
      if (!prefixes[oi].empty()) continue;
      const auto& atom = std::get<Atom>(p.rules[occs[oi].rule].body[occs[oi].literal]);
      Tuple t;
      for (auto k : positions) t.push_back(atom.args[k].value);
      seeds.insert(mdecl.name, std::move(t));
    }

    RuleId next_id = 0;
    for (const auto& r : p.rules) next_id = std::max(next_id, r.id + 1);
    for (auto ri : defs) {
      Rule& r = p.rules[ri];
      Atom filter{mdecl.name, {}, false};
      for (auto k : positions) filter.args.push_back(r.head.args[k]);
      r.body.push_back(std::move(filter));
      for (auto& l : r.body)
        if (auto* c = std::get_if<Constraint>(&l))
          if ((c->lhs.is_var() && c->rhs.is_const()) || (c->lhs.is_const() && c->rhs.is_var())) c->range_scan = true;
    }
    for (auto& dr : demand_rules) {
      dr.id = next_id++;
      p.rules.push_back(std::move(dr));
    }
    p.edb.ensure(mdecl.name);
    p.edb.merge(seeds);
    p.decls.push_back(std::move(mdecl));
    res.fired = true;
    res.restricted.push_back(h);
  }
  return res;
}

namespace {

class Substituter {
 public:
  Substituter(std::map<std::string, Term> head_map, std::set<std::string>& taken, int& counter)
      : map_(std::move(head_map)), taken_(taken), counter_(counter) {}

  Term apply(const Term& t) {
    switch (t.tag) {
      case Term::Tag::Var: {
        auto it = map_.find(t.name);
        if (it != map_.end()) return it->second;
        auto fresh = fresh_var();
        map_.emplace(t.name, fresh);
        return fresh;
      }
      case Term::Tag::Arith: {
        Term out = t;
        for (auto& a : out.args) a = apply(a);
        return out;
      }
      default: return t;
    }
  }

  Literal apply(const Literal& l) {
    if (const auto* a = as_atom(l)) {
      Atom out = *a;
      for (auto& t : out.args) t = apply(t);
      return out;
    }
    Constraint c = std::get<Constraint>(l);
    c.lhs = apply(c.lhs);
    c.rhs = apply(c.rhs);
    return c;
  }

  Term fresh_var() {
    std::string name;
    do name = "V_in" + std::to_string(counter_++);
    while (taken_.count(name));
    taken_.insert(name);
    return Term::var(name);
  }

 private:
  std::map<std::string, Term> map_;
  std::set<std::string>& taken_;
  int& counter_;
};

bool inline_candidate(const Program& p, const std::string& rel) {
  const auto* decl = p.find_decl(rel);
  if (!decl || is_internal_relation(rel)) return false;
  if (p.is_output(rel) || p.edb.contains(rel) || p.has_subsumption(rel)) return false;
  if (decl->has_annotation("no_inline")) return false;
  auto defs = rules_defining(p, rel);
  if (defs.size() != 1 || negated_anywhere(p, rel)) return false;
  const Rule& def = p.rules[defs[0]];
  if (reaches(dependency_graph(p), rel, rel) || rule_can_fail(def)) return false;
  std::set<std::string> seen;
  for (const auto& t : def.head.args)
    if (!t.is_var() || !seen.insert(t.name).second) return false;
  bool used = false;
  for (const auto& r : p.rules) {
    bool here = false;
    for (const auto& l : r.body) {
      const auto* a = as_atom(l);
      if (!a || a->relation != rel) continue;
      here = true;
      for (const auto& t : a->args)
        if (t.is_arith()) return false;
    }
    if (here && rule_can_fail(r)) return false;
    used |= here;
  }
  return used;
}

}  // namespace

InlineResult inline_rewrite(const Program& program, bool drop_last_literal) {
  InlineResult res{program, {}};
  Program& p = res.program;
  if (p.outputs.empty()) return res;
  int counter = 0;

  for (;;) {
    std::string target;
    for (const auto& d : p.decls)
      if (inline_candidate(p, d.name)) {
        target = d.name;
        break;
      }
    if (target.empty()) break;

    auto defs = rules_defining(p, target);
    const Rule def = p.rules[defs[0]];
    p.rules.erase(p.rules.begin() + static_cast<std::ptrdiff_t>(defs[0]));

    for (auto& r : p.rules) {
      for (std::size_t li = 0; li < r.body.size();) {
        const auto* a = as_atom(r.body[li]);
        if (!a || a->relation != target) {
          ++li;
          continue;
        }
        std::set<std::string> taken;
        {
          std::vector<std::string> vs;
          collect_vars(r.head, vs);
          for (const auto& l : r.body) collect_vars(l, vs);
          collect_vars(def.head, vs);
          for (const auto& l : def.body) collect_vars(l, vs);
          taken.insert(vs.begin(), vs.end());
        }
        std::map<std::string, Term> head_map;
        Substituter sub({}, taken, counter);
        for (std::size_t k = 0; k < def.head.args.size(); ++k) {
          Term arg = a->args[k];
          if (arg.is_wildcard()) arg = sub.fresh_var();
          head_map.emplace(def.head.args[k].name, arg);
        }
        Substituter subst(std::move(head_map), taken, counter);
        std::vector<Literal> spliced;
        for (const auto& l : def.body) spliced.push_back(subst.apply(l));

        Rule rewritten = r;
        rewritten.body.erase(rewritten.body.begin() + static_cast<std::ptrdiff_t>(li));
        rewritten.body.insert(rewritten.body.begin() + static_cast<std::ptrdiff_t>(li), spliced.begin(),
                              spliced.end());
        std::size_t advance = spliced.size();
        if (drop_last_literal && spliced.size() >= 2) {
          Rule dropped = rewritten;
          dropped.body.erase(dropped.body.begin() + static_cast<std::ptrdiff_t>(li + spliced.size() - 1));
          if (!check_safety(dropped)) {
            rewritten = std::move(dropped);
            --advance;
          }
        }
        r = std::move(rewritten);
        li += advance;
      }
    }
    res.inlined.push_back(target);
  }
  return res;
}

}  // namespace deopt
