#include "deopt/program.hpp"

#include <map>

namespace deopt {

std::string_view arith_op_name(ArithOp op) {
  switch (op) {
    case ArithOp::Add: return "+";
    case ArithOp::Sub: return "-";
    case ArithOp::Mul: return "*";
    case ArithOp::Div: return "/";
    case ArithOp::Mod: return "%";
    case ArithOp::Pow: return "^";
    case ArithOp::Neg: return "neg";
  }
  return "?";
}

std::optional<ArithOp> parse_arith_op(std::string_view name) {
  for (auto op : {ArithOp::Add, ArithOp::Sub, ArithOp::Mul, ArithOp::Div, ArithOp::Mod, ArithOp::Pow,
                  ArithOp::Neg})
    if (arith_op_name(op) == name) return op;
  return std::nullopt;
}

std::string_view cmp_op_symbol(CmpOp op) {
  switch (op) {
    case CmpOp::Lt: return "<";
    case CmpOp::Gt: return ">";
    case CmpOp::Le: return "<=";
    case CmpOp::Ge: return ">=";
    case CmpOp::Eq: return "=";
    case CmpOp::Ne: return "!=";
  }
  return "?";
}

std::optional<CmpOp> parse_cmp_op(std::string_view sym) {
  for (auto op : {CmpOp::Lt, CmpOp::Gt, CmpOp::Le, CmpOp::Ge, CmpOp::Eq, CmpOp::Ne})
    if (cmp_op_symbol(op) == sym) return op;
  return std::nullopt;
}

Term Term::var(std::string n) {
  Term t;
  t.tag = Tag::Var;
  t.name = std::move(n);
  return t;
}

Term Term::wildcard() { return Term{}; }

Term Term::constant(Value v) {
  Term t;
  t.tag = Tag::Const;
  t.value = std::move(v);
  return t;
}

Term Term::arith(ArithOp op, std::vector<Term> operands) {
  Term t;
  t.tag = Tag::Arith;
  t.op = op;
  t.args = std::move(operands);
  return t;
}

std::vector<Kind> RelationDecl::kinds() const {
  std::vector<Kind> out;
  out.reserve(attrs.size());
  for (const auto& [n, k] : attrs) out.push_back(k);
  return out;
}

const RelationDecl* Program::find_decl(const std::string& name) const {
  for (const auto& d : decls)
    if (d.name == name) return &d;
  return nullptr;
}

RelationDecl* Program::find_decl(const std::string& name) {
  for (auto& d : decls)
    if (d.name == name) return &d;
  return nullptr;
}

const Rule* Program::find_rule(RuleId id) const {
  for (const auto& r : rules)
    if (r.id == id) return &r;
  return nullptr;
}

bool Program::is_output(const std::string& rel) const {
  for (const auto& o : outputs)
    if (o == rel) return true;
  return false;
}

bool Program::has_subsumption(const std::string& rel) const {
  for (const auto& s : subsumptions)
    if (s.relation == rel) return true;
  return false;
}

std::set<std::string> Program::idb_relations() const {
  std::set<std::string> out;
  for (const auto& r : rules) out.insert(r.head.relation);
  return out;
}

void collect_vars(const Term& t, std::vector<std::string>& out) {
  switch (t.tag) {
    case Term::Tag::Var: out.push_back(t.name); break;
    case Term::Tag::Arith:
      for (const auto& a : t.args) collect_vars(a, out);
      break;
    default: break;
  }
}

void collect_vars(const Atom& a, std::vector<std::string>& out) {
  for (const auto& t : a.args) collect_vars(t, out);
}

void collect_vars(const Literal& l, std::vector<std::string>& out) {
  if (const auto* a = as_atom(l)) {
    collect_vars(*a, out);
  } else {
    const auto& c = std::get<Constraint>(l);
    collect_vars(c.lhs, out);
    collect_vars(c.rhs, out);
  }
}

std::set<std::string> var_set(const Term& t) {
  std::vector<std::string> v;
  collect_vars(t, v);
  return {v.begin(), v.end()};
}

std::set<std::string> var_set(const Literal& l) {
  std::vector<std::string> v;
  collect_vars(l, v);
  return {v.begin(), v.end()};
}

bool term_has_arith(const Term& t) { return t.is_arith(); }

bool term_uses_op(const Term& t, ArithOp op) {
  if (!t.is_arith()) return false;
  if (t.op == op) return true;
  for (const auto& a : t.args)
    if (term_uses_op(a, op)) return true;
  return false;
}

const Atom* as_atom(const Literal& l) { return std::get_if<Atom>(&l); }
const Constraint* as_constraint(const Literal& l) { return std::get_if<Constraint>(&l); }

std::set<std::string> positive_body_relations(const Rule& r) {
  std::set<std::string> out;
  for (const auto& l : r.body)
    if (const auto* a = as_atom(l); a && !a->negated) out.insert(a->relation);
  return out;
}

std::set<std::string> negative_body_relations(const Rule& r) {
  std::set<std::string> out;
  for (const auto& l : r.body)
    if (const auto* a = as_atom(l); a && a->negated) out.insert(a->relation);
  return out;
}

std::set<std::string> body_relations(const Rule& r) {
  std::set<std::string> out;
  for (const auto& l : r.body)
    if (const auto* a = as_atom(l)) out.insert(a->relation);
  return out;
}

namespace {

std::string format_const(const Value& v) {
  switch (v.kind()) {
    case Kind::Symbol: return "\"" + v.as_symbol() + "\"";
    case Kind::Unsigned: return format_value(v) + "u";
    case Kind::Float: {
      auto s = format_value(v);
      if (s.find_first_of(".en") == std::string::npos) s += ".0";
      return s;
    }
    case Kind::Signed: return format_value(v);
  }
  return {};
}

}  // namespace

std::string format_term(const Term& t) {
  switch (t.tag) {
    case Term::Tag::Var: return t.name;
    case Term::Tag::Wildcard: return "_";
    case Term::Tag::Const: return format_const(t.value);
    case Term::Tag::Arith:
      if (t.op == ArithOp::Neg) return "-(" + format_term(t.args.at(0)) + ")";
      return "(" + format_term(t.args.at(0)) + std::string(arith_op_name(t.op)) + format_term(t.args.at(1)) + ")";
  }
  return {};
}

std::string format_atom(const Atom& a) {
  std::string s = a.negated ? "!" : "";
  s += a.relation + "(";
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (i) s += ",";
    s += format_term(a.args[i]);
  }
  return s + ")";
}

std::string format_constraint(const Constraint& c) {
  return format_term(c.lhs) + std::string(cmp_op_symbol(c.op)) + format_term(c.rhs);
}

std::string format_literal(const Literal& l) {
  if (const auto* a = as_atom(l)) return format_atom(*a);
  return format_constraint(std::get<Constraint>(l));
}

std::string format_rule(const Rule& r) {
  std::string s = format_atom(r.head) + " :- ";
  for (std::size_t i = 0; i < r.body.size(); ++i) {
    if (i) s += ", ";
    s += format_literal(r.body[i]);
  }
  return s + ".";
}

std::string format_subsumption(const SubsumptionRule& s) {
  Atom lo{s.relation, s.dominated, false};
  Atom hi{s.relation, s.dominating, false};
  std::string out = format_atom(lo) + " <= " + format_atom(hi);
  if (!s.condition.empty()) {
    out += " :- ";
    for (std::size_t i = 0; i < s.condition.size(); ++i) {
      if (i) out += ", ";
      out += format_constraint(s.condition[i]);
    }
  }
  return out + ".";
}

namespace {

std::optional<std::string> check_atom(const Program& p, const Atom& a) {
  const auto* d = p.find_decl(a.relation);
  if (!d) return "undeclared relation " + a.relation;
  if (d->arity() != a.args.size())
    return "arity mismatch for " + a.relation + ": expected " + std::to_string(d->arity()) + ", got " +
           std::to_string(a.args.size());
  return std::nullopt;
}

}  // namespace

std::optional<std::string> validate_program(const Program& p) {
  std::set<std::string> names;
  for (const auto& d : p.decls) {
    if (d.name.empty()) return "empty relation name";
    if (!names.insert(d.name).second) return "duplicate declaration " + d.name;
  }
  for (const auto& [rel, tuples] : p.edb) {
    const auto* d = p.find_decl(rel);
    if (!d) {
      if (tuples.empty()) continue;
      return "facts for undeclared relation " + rel;
    }
    auto kinds = d->kinds();
    for (const auto& t : tuples) {
      if (t.size() != kinds.size()) return "fact arity mismatch for " + rel;
      for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i].kind() != kinds[i]) return "fact kind mismatch for " + rel + " " + format_tuple(t);
        if (t[i].kind() == Kind::Symbol && !is_valid_symbol(t[i].as_symbol()))
          return "invalid symbol in fact for " + rel;
      }
    }
  }
  std::set<RuleId> ids;
  for (const auto& r : p.rules) {
    if (!ids.insert(r.id).second) return "duplicate rule id " + std::to_string(r.id);
    if (r.head.negated) return "negated head in rule " + std::to_string(r.id);
    if (r.body.empty()) return "empty body in rule " + std::to_string(r.id);
    if (auto e = check_atom(p, r.head)) return e;
    for (const auto& l : r.body)
      if (const auto* a = as_atom(l))
        if (auto e = check_atom(p, *a)) return e;
  }
  for (const auto& s : p.subsumptions) {
    const auto* d = p.find_decl(s.relation);
    if (!d) return "subsumption over undeclared relation " + s.relation;
    if (s.dominated.size() != d->arity() || s.dominating.size() != d->arity())
      return "subsumption arity mismatch for " + s.relation;
  }
  for (const auto& o : p.outputs)
    if (!p.find_decl(o)) return "undeclared output relation " + o;
  return std::nullopt;
}

}  // namespace deopt
