#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "deopt/fact_store.hpp"
#include "deopt/value.hpp"

namespace deopt {

enum class ArithOp : std::uint8_t { Add, Sub, Mul, Div, Mod, Pow, Neg };
enum class CmpOp : std::uint8_t { Lt, Gt, Le, Ge, Eq, Ne };

std::string_view arith_op_name(ArithOp op);
std::optional<ArithOp> parse_arith_op(std::string_view name);
std::string_view cmp_op_symbol(CmpOp op);
std::optional<CmpOp> parse_cmp_op(std::string_view sym);

struct Term {
  enum class Tag : std::uint8_t { Var, Wildcard, Const, Arith };

  Tag tag = Tag::Wildcard;
  std::string name;  // Var
  Value value;       // Const
  ArithOp op = ArithOp::Add;
  std::vector<Term> args;  // Arith operands (one for Neg, two otherwise)

  static Term var(std::string n);
  static Term wildcard();
  static Term constant(Value v);
  static Term arith(ArithOp op, std::vector<Term> operands);
  static Term binary(ArithOp op, Term a, Term b) { return arith(op, {std::move(a), std::move(b)}); }
  static Term neg(Term a) { return arith(ArithOp::Neg, {std::move(a)}); }
  static Term num(std::int64_t v) { return constant(Value::signed_int(v)); }
  static Term flt(double v) { return constant(Value::floating(v)); }
  static Term sym(std::string s) { return constant(Value::symbol(std::move(s))); }

  bool is_var() const { return tag == Tag::Var; }
  bool is_wildcard() const { return tag == Tag::Wildcard; }
  bool is_const() const { return tag == Tag::Const; }
  bool is_arith() const { return tag == Tag::Arith; }

  friend bool operator==(const Term&, const Term&) = default;
};

struct Atom {
  std::string relation;
  std::vector<Term> args;
  bool negated = false;

  friend bool operator==(const Atom&, const Atom&) = default;
};

struct Constraint {
  CmpOp op = CmpOp::Eq;
  Term lhs;
  Term rhs;
  // Set by the demand rewrite on filters it moved next to a bound argument.
  bool range_scan = false;

  friend bool operator==(const Constraint&, const Constraint&) = default;
};

using Literal = std::variant<Atom, Constraint>;

using RuleId = std::uint64_t;

struct Rule {
  RuleId id = 0;
  Atom head;
  std::vector<Literal> body;

  friend bool operator==(const Rule&, const Rule&) = default;
};

/// `rel(dominated) <= rel(dominating) :- condition.`
struct SubsumptionRule {
  std::string relation;
  std::vector<Term> dominated;
  std::vector<Term> dominating;
  std::vector<Constraint> condition;

  friend bool operator==(const SubsumptionRule&, const SubsumptionRule&) = default;
};

struct RelationDecl {
  std::string name;
  std::vector<std::pair<std::string, Kind>> attrs;
  std::set<std::string> annotations;

  std::size_t arity() const { return attrs.size(); }
  std::vector<Kind> kinds() const;
  bool has_annotation(const std::string& a) const { return annotations.count(a) != 0; }

  friend bool operator==(const RelationDecl&, const RelationDecl&) = default;
};

struct Program {
  std::vector<RelationDecl> decls;
  FactStore edb;
  std::vector<Rule> rules;
  std::vector<SubsumptionRule> subsumptions;
  // The last entry is the current output relation of an incrementally grown
  // program; reference programs list every head relation.
  std::vector<std::string> outputs;

  const RelationDecl* find_decl(const std::string& name) const;
  RelationDecl* find_decl(const std::string& name);
  const Rule* find_rule(RuleId id) const;
  bool is_output(const std::string& rel) const;
  std::string output_rel() const { return outputs.empty() ? std::string() : outputs.back(); }
  bool has_subsumption(const std::string& rel) const;
  /// Relations with at least one defining rule.
  std::set<std::string> idb_relations() const;

  friend bool operator==(const Program&, const Program&) = default;
};

/// Appends variable names in left-to-right order (duplicates kept).
void collect_vars(const Term& t, std::vector<std::string>& out);
void collect_vars(const Atom& a, std::vector<std::string>& out);
void collect_vars(const Literal& l, std::vector<std::string>& out);
std::set<std::string> var_set(const Term& t);
std::set<std::string> var_set(const Literal& l);
bool term_has_arith(const Term& t);
bool term_uses_op(const Term& t, ArithOp op);

const Atom* as_atom(const Literal& l);
const Constraint* as_constraint(const Literal& l);

/// Relations occurring in the rule body, split by polarity.
std::set<std::string> positive_body_relations(const Rule& r);
std::set<std::string> negative_body_relations(const Rule& r);
std::set<std::string> body_relations(const Rule& r);

/// Plain Datalog text for diagnostics (Souffle-flavoured).
std::string format_term(const Term& t);
std::string format_atom(const Atom& a);
std::string format_literal(const Literal& l);
std::string format_constraint(const Constraint& c);
std::string format_rule(const Rule& r);
std::string format_subsumption(const SubsumptionRule& s);

/// Structural checks: unique decl names, declared relations, arities, fact
/// kinds, non-empty bodies, unique rule ids. Returns the first problem found.
std::optional<std::string> validate_program(const Program& p);

}  // namespace deopt
