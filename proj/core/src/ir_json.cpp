#include "deopt/ir_json.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "ir_json_internal.hpp"

namespace deopt {

namespace detail {

std::string value_token(const Value& v) {
  if (v.kind() == Kind::Float && std::isnan(v.as_float())) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "nan:0x%016llx", static_cast<unsigned long long>(v.float_bits()));
    return buf;
  }
  return format_value(v);
}

std::optional<Value> value_from_token(const std::string& token, Kind kind) {
  if (kind == Kind::Float && token.rfind("nan:0x", 0) == 0) {
    try {
      return Value::float_bits(std::stoull(token.substr(6), nullptr, 16));
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }
  return parse_value(token, kind);
}

json value_to_json(const Value& v) {
  return json{{"kind", std::string(kind_name(v.kind()))}, {"value", value_token(v)}};
}

Value value_from_json(const json& j) {
  auto kind = parse_kind(j.at("kind").get<std::string>());
  if (!kind) throw std::runtime_error("unknown kind " + j.at("kind").dump());
  auto v = value_from_token(j.at("value").get<std::string>(), *kind);
  if (!v) throw std::runtime_error("bad value " + j.dump());
  return *v;
}

json term_to_json(const Term& t) {
  switch (t.tag) {
    case Term::Tag::Var: return json{{"var", t.name}};
    case Term::Tag::Wildcard: return json{{"wildcard", true}};
    case Term::Tag::Const: return json{{"const", value_to_json(t.value)}};
    case Term::Tag::Arith: {
      json args = json::array();
      for (const auto& a : t.args) args.push_back(term_to_json(a));
      return json{{"op", std::string(arith_op_name(t.op))}, {"args", args}};
    }
  }
  return {};
}

Term term_from_json(const json& j) {
  if (j.contains("var")) return Term::var(j["var"].get<std::string>());
  if (j.contains("wildcard")) return Term::wildcard();
  if (j.contains("const")) return Term::constant(value_from_json(j["const"]));
  if (j.contains("op")) {
    auto op = parse_arith_op(j["op"].get<std::string>());
    if (!op) throw std::runtime_error("unknown operator " + j["op"].dump());
    std::vector<Term> args;
    for (const auto& a : j.at("args")) args.push_back(term_from_json(a));
    if (args.size() != (*op == ArithOp::Neg ? 1u : 2u)) throw std::runtime_error("operand count for " + j.dump());
    return Term::arith(*op, std::move(args));
  }
  throw std::runtime_error("bad term " + j.dump());
}

namespace {

json terms_to_json(const std::vector<Term>& ts) {
  json out = json::array();
  for (const auto& t : ts) out.push_back(term_to_json(t));
  return out;
}

std::vector<Term> terms_from_json(const json& j) {
  std::vector<Term> out;
  for (const auto& t : j) out.push_back(term_from_json(t));
  return out;
}

json atom_to_json(const Atom& a) {
  json j{{"rel", a.relation}, {"args", terms_to_json(a.args)}};
  if (a.negated) j["neg"] = true;
  return j;
}

Atom atom_from_json(const json& j) {
  Atom a;
  a.relation = j.at("rel").get<std::string>();
  a.args = terms_from_json(j.at("args"));
  a.negated = j.value("neg", false);
  return a;
}

json constraint_to_json(const Constraint& c) {
  json j{{"cmp", std::string(cmp_op_symbol(c.op))}, {"lhs", term_to_json(c.lhs)}, {"rhs", term_to_json(c.rhs)}};
  if (c.range_scan) j["range_scan"] = true;
  return j;
}

Constraint constraint_from_json(const json& j) {
  auto op = parse_cmp_op(j.at("cmp").get<std::string>());
  if (!op) throw std::runtime_error("unknown comparison " + j["cmp"].dump());
  Constraint c{*op, term_from_json(j.at("lhs")), term_from_json(j.at("rhs")), j.value("range_scan", false)};
  return c;
}

}  // namespace

json rule_to_json(const Rule& r) {
  json body = json::array();
  for (const auto& l : r.body) {
    if (const auto* a = as_atom(l))
      body.push_back(atom_to_json(*a));
    else
      body.push_back(constraint_to_json(std::get<Constraint>(l)));
  }
  return json{{"id", r.id}, {"head", atom_to_json(r.head)}, {"body", body}};
}

Rule rule_from_json(const json& j) {
  Rule r;
  r.id = j.at("id").get<RuleId>();
  r.head = atom_from_json(j.at("head"));
  for (const auto& l : j.at("body")) {
    if (l.contains("cmp"))
      r.body.push_back(constraint_from_json(l));
    else
      r.body.push_back(atom_from_json(l));
  }
  return r;
}

json tuples_to_json(const TupleSet& tuples) {
  json rows = json::array();
  for (const auto& t : tuples) {
    json row = json::array();
    for (const auto& v : t) row.push_back(value_token(v));
    rows.push_back(std::move(row));
  }
  return rows;
}

TupleSet tuples_from_json(const json& j, const std::vector<Kind>& kinds) {
  TupleSet out;
  for (const auto& row : j) {
    if (row.size() != kinds.size()) throw std::runtime_error("row arity mismatch " + row.dump());
    Tuple t;
    for (std::size_t i = 0; i < kinds.size(); ++i) {
      auto v = value_from_token(row[i].get<std::string>(), kinds[i]);
      if (!v) throw std::runtime_error("bad token " + row[i].dump());
      t.push_back(std::move(*v));
    }
    out.insert(std::move(t));
  }
  return out;
}

json facts_to_json(const FactStore& facts) {
  json j = json::object();
  for (const auto& [rel, tuples] : facts) j[rel] = tuples_to_json(tuples);
  return j;
}

json program_to_json(const Program& p, bool strip_annotations) {
  json decls = json::array();
  for (const auto& d : p.decls) {
    json attrs = json::array();
    for (const auto& [n, k] : d.attrs) attrs.push_back(json::array({n, std::string(kind_name(k))}));
    json ann = json::array();
    if (!strip_annotations)
      for (const auto& a : d.annotations) ann.push_back(a);
    decls.push_back(json{{"name", d.name}, {"attrs", attrs}, {"annotations", ann}});
  }
  json rules = json::array();
  for (const auto& r : p.rules) rules.push_back(rule_to_json(r));
  json subs = json::array();
  for (const auto& s : p.subsumptions) {
    json cond = json::array();
    for (const auto& c : s.condition) cond.push_back(constraint_to_json(c));
    subs.push_back(json{{"rel", s.relation},
                        {"dominated", terms_to_json(s.dominated)},
                        {"dominating", terms_to_json(s.dominating)},
                        {"condition", cond}});
  }
  return json{{"decls", decls},
              {"facts", facts_to_json(p.edb)},
              {"rules", rules},
              {"subsumptions", subs},
              {"outputs", p.outputs}};
}

Program program_from_json(const json& j) {
  Program p;
  for (const auto& d : j.at("decls")) {
    RelationDecl decl;
    decl.name = d.at("name").get<std::string>();
    for (const auto& a : d.at("attrs")) {
      auto k = parse_kind(a.at(1).get<std::string>());
      if (!k) throw std::runtime_error("unknown kind in " + decl.name);
      decl.attrs.push_back({a.at(0).get<std::string>(), *k});
    }
    if (d.contains("annotations"))
      for (const auto& a : d["annotations"]) decl.annotations.insert(a.get<std::string>());
    p.decls.push_back(std::move(decl));
  }
  if (j.contains("facts"))
    for (const auto& [rel, rows] : j["facts"].items()) {
      const auto* d = p.find_decl(rel);
      if (!d) throw std::runtime_error("facts for undeclared relation " + rel);
      p.edb.set(rel, tuples_from_json(rows, d->kinds()));
    }
  if (j.contains("rules"))
    for (const auto& r : j["rules"]) p.rules.push_back(rule_from_json(r));
  if (j.contains("subsumptions"))
    for (const auto& s : j["subsumptions"]) {
      SubsumptionRule sub;
      sub.relation = s.at("rel").get<std::string>();
      sub.dominated = terms_from_json(s.at("dominated"));
      sub.dominating = terms_from_json(s.at("dominating"));
      for (const auto& c : s.at("condition")) sub.condition.push_back(constraint_from_json(c));
      p.subsumptions.push_back(std::move(sub));
    }
  if (j.contains("outputs")) p.outputs = j["outputs"].get<std::vector<std::string>>();
  return p;
}

}  // namespace detail

std::string program_to_json_text(const Program& p, bool strip_annotations) {
  return detail::program_to_json(p, strip_annotations).dump(2) + "\n";
}

std::optional<Program> program_from_json_text(const std::string& text, std::string* error) {
  try {
    return detail::program_from_json(nlohmann::json::parse(text));
  } catch (const std::exception& e) {
    if (error) *error = e.what();
    return std::nullopt;
  }
}

std::string facts_to_json_text(const FactStore& facts) { return detail::facts_to_json(facts).dump(2) + "\n"; }

std::optional<FactStore> facts_from_json_text(const std::string& text, const Program& decls, std::string* error) {
  try {
    auto j = nlohmann::json::parse(text);
    FactStore out;
    for (const auto& [rel, rows] : j.items()) {
      const auto* d = decls.find_decl(rel);
      if (!d) throw std::runtime_error("undeclared relation " + rel);
      out.set(rel, detail::tuples_from_json(rows, d->kinds()));
    }
    return out;
  } catch (const std::exception& e) {
    if (error) *error = e.what();
    return std::nullopt;
  }
}

}  // namespace deopt
