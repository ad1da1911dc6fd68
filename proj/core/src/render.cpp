#include "deopt/render.hpp"

#include "deopt/ir_json.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace deopt {

namespace fs = std::filesystem;

std::string_view dialect_name(Dialect d) {
  switch (d) {
    case Dialect::SouffleLike: return "souffle";
    case Dialect::CozoLike: return "cozo";
    case Dialect::MuZLike: return "muz";
    case Dialect::Embedded: return "embedded";
  }
  return "?";
}

std::optional<Dialect> parse_dialect(std::string_view name) {
  for (auto d : {Dialect::SouffleLike, Dialect::CozoLike, Dialect::MuZLike, Dialect::Embedded})
    if (dialect_name(d) == name) return d;
  return std::nullopt;
}

DialectFeatures dialect_features(Dialect d) {
  DialectFeatures f;
  switch (d) {
    case Dialect::SouffleLike:
      f.supports_subsumption = true;
      break;
    case Dialect::CozoLike:
      f.requires_decls = false;
      f.fact_channel = FactChannel::Inline;
      f.supports_unsigned = false;
      f.supports_zero_arity = false;
      f.max_outputs = 1;
      break;
    case Dialect::MuZLike:
      f.supports_negation_in_recursion = false;
      f.fact_channel = FactChannel::Inline;
      f.supports_symbols = false;
      f.supports_floats = false;
      f.supports_unsigned = false;
      break;
    case Dialect::Embedded:
      f.supports_subsumption = true;
      break;
  }
  return f;
}

namespace {

bool muz_supported_term(const Term& t) {
  if (!t.is_arith()) return true;
  if (t.op != ArithOp::Add && t.op != ArithOp::Sub && t.op != ArithOp::Mul) return false;
  for (const auto& a : t.args)
    if (!muz_supported_term(a)) return false;
  return true;
}

}  // namespace

std::optional<std::string> check_feature_set(const Program& p, Dialect d) {
  auto f = dialect_features(d);
  for (const auto& decl : p.decls) {
    if (decl.arity() == 0 && !f.supports_zero_arity) return "zero-arity relation " + decl.name;
    for (const auto& [n, k] : decl.attrs) {
      if (k == Kind::Symbol && !f.supports_symbols) return "symbol attribute in " + decl.name;
      if (k == Kind::Float && !f.supports_floats) return "float attribute in " + decl.name;
      if (k == Kind::Unsigned && !f.supports_unsigned) return "unsigned attribute in " + decl.name;
    }
  }
  if (!p.subsumptions.empty() && !f.supports_subsumption) return "subsumption";
  if (p.outputs.size() > f.max_outputs) return "too many output relations";
  if (d == Dialect::MuZLike) {
    for (const auto& r : p.rules) {
      for (const auto& t : r.head.args)
        if (!muz_supported_term(t)) return "unsupported arithmetic";
      for (const auto& l : r.body) {
        if (const auto* a = as_atom(l)) {
          for (const auto& t : a->args)
            if (!muz_supported_term(t)) return "unsupported arithmetic";
        } else {
          const auto& c = std::get<Constraint>(l);
          if (!muz_supported_term(c.lhs) || !muz_supported_term(c.rhs)) return "unsupported arithmetic";
        }
      }
    }
  }
  return std::nullopt;
}

std::string render_fact_file(const TupleSet& tuples) {
  std::string out;
  for (const auto& t : tuples) {
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (i) out += '\t';
      out += format_value(t[i]);
    }
    out += '\n';
  }
  return out;
}

std::optional<TupleSet> parse_fact_rows(const std::string& text, const std::vector<Kind>& kinds, std::string* error,
                                        char delimiter) {
  TupleSet out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && !kinds.empty()) continue;
    std::vector<std::string> fields;
    if (!kinds.empty()) {
      std::size_t start = 0;
      for (;;) {
        auto pos = line.find(delimiter, start);
        fields.push_back(line.substr(start, pos - start));
        if (pos == std::string::npos) break;
        start = pos + 1;
      }
    }
    if (fields.size() != kinds.size()) {
      if (error) *error = "line " + std::to_string(lineno) + ": expected " + std::to_string(kinds.size()) + " fields";
      return std::nullopt;
    }
    Tuple t;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      auto v = parse_value(fields[i], kinds[i]);
      if (!v) {
        if (error) *error = "line " + std::to_string(lineno) + ": bad token '" + fields[i] + "'";
        return std::nullopt;
      }
      t.push_back(std::move(*v));
    }
    out.insert(std::move(t));
  }
  return out;
}

namespace {

// ---------------------------------------------------------------- Souffle --

std::string souffle_kind(Kind k) {
  switch (k) {
    case Kind::Signed: return "number";
    case Kind::Unsigned: return "unsigned";
    case Kind::Float: return "float";
    case Kind::Symbol: return "symbol";
  }
  return "?";
}

std::string souffle_const(const Value& v) {
  switch (v.kind()) {
    case Kind::Symbol: return "\"" + v.as_symbol() + "\"";
    case Kind::Float: {
      auto s = format_value(v);
      if (s.find_first_of(".e") == std::string::npos) s += ".0";
      return s;
    }
    default: return format_value(v);
  }
}

std::string souffle_term(const Term& t) {
  switch (t.tag) {
    case Term::Tag::Var: return t.name;
    case Term::Tag::Wildcard: return "_";
    case Term::Tag::Const: return souffle_const(t.value);
    case Term::Tag::Arith:
      if (t.op == ArithOp::Neg) return "-(" + souffle_term(t.args[0]) + ")";
      return "(" + souffle_term(t.args[0]) + " " + std::string(arith_op_name(t.op)) + " " +
             souffle_term(t.args[1]) + ")";
  }
  return {};
}

std::string souffle_atom(const Atom& a) {
  std::string s = a.negated ? "!" : "";
  s += a.relation + "(";
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (i) s += ", ";
    s += souffle_term(a.args[i]);
  }
  return s + ")";
}

std::string souffle_constraint(const Constraint& c) {
  return souffle_term(c.lhs) + " " + std::string(cmp_op_symbol(c.op)) + " " + souffle_term(c.rhs);
}

std::string souffle_rule(const Rule& r) {
  std::string s = souffle_atom(r.head) + " :- ";
  for (std::size_t i = 0; i < r.body.size(); ++i) {
    if (i) s += ", ";
    if (const auto* a = as_atom(r.body[i]))
      s += souffle_atom(*a);
    else
      s += souffle_constraint(std::get<Constraint>(r.body[i]));
  }
  return s + ".";
}

std::string souffle_subsumption(const SubsumptionRule& sub) {
  std::string s = souffle_atom(Atom{sub.relation, sub.dominated, false}) + " <= " +
                  souffle_atom(Atom{sub.relation, sub.dominating, false});
  if (!sub.condition.empty()) {
    s += " :- ";
    for (std::size_t i = 0; i < sub.condition.size(); ++i) {
      if (i) s += ", ";
      s += souffle_constraint(sub.condition[i]);
    }
  }
  return s + ".";
}

std::set<std::string> input_relations(const Program& p) {
  std::set<std::string> in;
  for (const auto& [rel, tuples] : p.edb) in.insert(rel);
  return in;
}

std::string souffle_decl(const RelationDecl& d, Role role, bool strip) {
  std::string s = ".decl " + d.name + "(";
  for (std::size_t i = 0; i < d.attrs.size(); ++i) {
    if (i) s += ", ";
    s += d.attrs[i].first + ":" + souffle_kind(d.attrs[i].second);
  }
  s += ")";
  for (const auto& a : d.annotations) {
    if (role == Role::Reference && (strip || a == "inline")) continue;
    s += " " + a;
  }
  return s;
}

RenderedArtifacts render_souffle(const Program& p, Role role, bool strip) {
  RenderedArtifacts out;
  std::ostringstream os;
  auto inputs = input_relations(p);
  for (const auto& d : p.decls) {
    os << souffle_decl(d, role, strip) << "\n";
    if (inputs.count(d.name)) {
      os << ".input " << d.name << "\n";
      out.files["facts/" + d.name + ".facts"] = render_fact_file(p.edb.get(d.name));
    }
    if (p.is_output(d.name)) os << ".output " << d.name << "\n";
  }
  if (!p.rules.empty() || !p.subsumptions.empty()) os << "\n";
  for (const auto& r : p.rules) os << souffle_rule(r) << "\n";
  for (const auto& s : p.subsumptions) os << souffle_subsumption(s) << "\n";
  out.program_text = os.str();
  out.outputs = p.outputs;
  return out;
}

// ------------------------------------------------------------------- Cozo --

std::string cozo_const(const Value& v) { return souffle_const(v); }

std::string cozo_term(const Term& t) {
  switch (t.tag) {
    case Term::Tag::Var: return t.name;
    case Term::Tag::Wildcard: return "_";
    case Term::Tag::Const: return cozo_const(t.value);
    case Term::Tag::Arith:
      switch (t.op) {
        case ArithOp::Neg: return "-(" + cozo_term(t.args[0]) + ")";
        case ArithOp::Mod: return "mod(" + cozo_term(t.args[0]) + ", " + cozo_term(t.args[1]) + ")";
        case ArithOp::Pow: return "pow(" + cozo_term(t.args[0]) + ", " + cozo_term(t.args[1]) + ")";
        default:
          return "(" + cozo_term(t.args[0]) + " " + std::string(arith_op_name(t.op)) + " " +
                 cozo_term(t.args[1]) + ")";
      }
  }
  return {};
}

std::string cozo_cmp(CmpOp op) { return op == CmpOp::Eq ? "==" : std::string(cmp_op_symbol(op)); }

std::string cozo_atom_args(const std::vector<Term>& args) {
  std::string s = "[";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) s += ", ";
    s += cozo_term(args[i]);
  }
  return s + "]";
}

std::string cozo_rule(const Rule& r) {
  // Heads take plain variables; anything else is bound through a fresh one.
  std::vector<Term> head;
  std::vector<std::string> extra;
  std::set<std::string> used;
  for (std::size_t i = 0; i < r.head.args.size(); ++i) {
    const Term& t = r.head.args[i];
    if (t.is_var() && used.insert(t.name).second) {
      head.push_back(t);
      continue;
    }
    std::string v = "H" + std::to_string(i);
    head.push_back(Term::var(v));
    extra.push_back(v + " = " + cozo_term(t));
  }
  std::string s = r.head.relation + cozo_atom_args(head) + " := ";
  bool first = true;
  for (const auto& l : r.body) {
    if (!first) s += ", ";
    first = false;
    if (const auto* a = as_atom(l)) {
      if (a->negated) s += "not ";
      s += a->relation + cozo_atom_args(a->args);
    } else {
      const auto& c = std::get<Constraint>(l);
      s += cozo_term(c.lhs) + " " + cozo_cmp(c.op) + " " + cozo_term(c.rhs);
    }
  }
  for (const auto& e : extra) s += ", " + e;
  return s;
}

std::string cozo_vars(std::size_t n) {
  std::string s = "[";
  for (std::size_t i = 0; i < n; ++i) {
    if (i) s += ", ";
    s += "C" + std::to_string(i);
  }
  return s + "]";
}

RenderedArtifacts render_cozo(const Program& p) {
  RenderedArtifacts out;
  std::ostringstream os;
  for (const auto& [rel, tuples] : p.edb) {
    const auto* d = p.find_decl(rel);
    std::size_t arity = d ? d->arity() : 0;
    os << rel << cozo_vars(arity) << " <- [";
    bool first = true;
    for (const auto& t : tuples) {
      if (!first) os << ", ";
      first = false;
      os << "[";
      for (std::size_t i = 0; i < t.size(); ++i) {
        if (i) os << ", ";
        os << cozo_const(t[i]);
      }
      os << "]";
    }
    os << "]\n";
  }
  for (const auto& r : p.rules) os << cozo_rule(r) << "\n";
  if (!p.outputs.empty()) {
    const auto& o = p.outputs.back();
    const auto* d = p.find_decl(o);
    auto vars = cozo_vars(d ? d->arity() : 0);
    os << "?" << vars << " := " << o << vars << "\n";
    out.outputs = {o};
  }
  out.program_text = os.str();
  return out;
}

// -------------------------------------------------------------------- MuZ --

std::string muz_term(const Term& t) {
  switch (t.tag) {
    case Term::Tag::Var: return t.name;
    case Term::Tag::Wildcard: return "_";
    case Term::Tag::Const: return format_value(t.value);
    case Term::Tag::Arith:
      if (t.op == ArithOp::Neg) return "(0 - " + muz_term(t.args[0]) + ")";
      return "(" + muz_term(t.args[0]) + " " + std::string(arith_op_name(t.op)) + " " + muz_term(t.args[1]) + ")";
  }
  return {};
}

std::string muz_atom(const Atom& a) {
  std::string s = a.negated ? "!" : "";
  s += a.relation + "(";
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (i) s += ",";
    s += muz_term(a.args[i]);
  }
  return s + ")";
}

RenderedArtifacts render_muz(const Program& p) {
  RenderedArtifacts out;
  std::ostringstream os;
  os << "Z 64\n\n";
  auto inputs = input_relations(p);
  for (const auto& d : p.decls) {
    os << d.name << "(";
    for (std::size_t i = 0; i < d.attrs.size(); ++i) {
      if (i) os << ", ";
      os << d.attrs[i].first << ":Z";
    }
    os << ")";
    if (inputs.count(d.name)) os << " input";
    if (p.is_output(d.name)) os << " printtuples";
    os << "\n";
  }
  os << "\n";
  for (const auto& [rel, tuples] : p.edb)
    for (const auto& t : tuples) {
      os << rel << "(";
      for (std::size_t i = 0; i < t.size(); ++i) {
        if (i) os << ",";
        os << format_value(t[i]);
      }
      os << ").\n";
    }
  for (const auto& r : p.rules) {
    os << muz_atom(r.head) << " :- ";
    for (std::size_t i = 0; i < r.body.size(); ++i) {
      if (i) os << ", ";
      if (const auto* a = as_atom(r.body[i])) {
        os << muz_atom(*a);
      } else {
        const auto& c = std::get<Constraint>(r.body[i]);
        os << muz_term(c.lhs) << " " << cmp_op_symbol(c.op) << " " << muz_term(c.rhs);
      }
    }
    os << ".\n";
  }
  out.program_text = os.str();
  out.outputs = p.outputs;
  return out;
}

std::string read_file(const fs::path& p, bool* ok) {
  std::ifstream in(p, std::ios::binary);
  if (!in) {
    *ok = false;
    return {};
  }
  *ok = true;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::optional<Value> json_to_value(const nlohmann::json& j, Kind k) {
  switch (k) {
    case Kind::Signed:
      if (j.is_number_integer()) return Value::signed_int(j.get<std::int64_t>());
      break;
    case Kind::Unsigned:
      if (j.is_number_unsigned()) return Value::unsigned_int(j.get<std::uint64_t>());
      break;
    case Kind::Float:
      if (j.is_number()) return Value::floating(j.get<double>());
      break;
    case Kind::Symbol:
      if (j.is_string()) return Value::symbol(j.get<std::string>());
      break;
  }
  return std::nullopt;
}

std::string trim(std::string s) {
  const char* ws = " \t\r\n()";
  auto b = s.find_first_not_of(ws);
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

}  // namespace

RenderedArtifacts render_program(const Program& p, Dialect d, Role role, bool strip_annotations) {
  switch (d) {
    case Dialect::SouffleLike: return render_souffle(p, role, strip_annotations);
    case Dialect::CozoLike: return render_cozo(p);
    case Dialect::MuZLike: return render_muz(p);
    case Dialect::Embedded: break;
  }
  RenderedArtifacts out;
  out.program_text = program_to_json_text(p, role == Role::Reference && strip_annotations);
  out.outputs = p.outputs;
  return out;
}

std::optional<FactStore> parse_engine_output(Dialect d, const Program& p, const std::vector<std::string>& outputs,
                                             const std::string& outdir, const std::string& stdout_text,
                                             std::string* error) {
  FactStore out;
  auto kinds_of = [&](const std::string& rel) -> std::optional<std::vector<Kind>> {
    const auto* decl = p.find_decl(rel);
    if (!decl) return std::nullopt;
    return decl->kinds();
  };

  if (d == Dialect::SouffleLike || d == Dialect::Embedded) {
    for (const auto& rel : outputs) {
      auto kinds = kinds_of(rel);
      if (!kinds) {
        if (error) *error = "undeclared output " + rel;
        return std::nullopt;
      }
      bool ok = false;
      auto file = fs::path(outdir) / (rel + (d == Dialect::SouffleLike ? ".csv" : ".facts"));
      std::string text = read_file(file, &ok);
      if (!ok) {
        if (error) *error = "missing output file " + file.string();
        return std::nullopt;
      }
      // Zero-arity relations print one empty line per (single) tuple.
      if (kinds->empty()) {
        if (!text.empty()) out.insert(rel, Tuple{});
        out.ensure(rel);
        continue;
      }
      std::string err;
      auto rows = parse_fact_rows(text, *kinds, &err);
      if (!rows) {
        if (error) *error = rel + ": " + err;
        return std::nullopt;
      }
      out.set(rel, std::move(*rows));
    }
    return out;
  }

  if (d == Dialect::CozoLike) {
    if (outputs.empty()) return out;
    const auto& rel = outputs.back();
    auto kinds = kinds_of(rel);
    auto j = nlohmann::json::parse(stdout_text, nullptr, false);
    if (!kinds || j.is_discarded() || !j.contains("rows") || !j["rows"].is_array()) {
      if (error) *error = "unparseable result JSON";
      return std::nullopt;
    }
    auto& dst = out.ensure(rel);
    for (const auto& row : j["rows"]) {
      if (!row.is_array() || row.size() != kinds->size()) {
        if (error) *error = "row arity mismatch";
        return std::nullopt;
      }
      Tuple t;
      for (std::size_t i = 0; i < row.size(); ++i) {
        auto v = json_to_value(row[i], (*kinds)[i]);
        if (!v) {
          if (error) *error = "bad value " + row[i].dump();
          return std::nullopt;
        }
        t.push_back(std::move(*v));
      }
      dst.insert(std::move(t));
    }
    return out;
  }

  // MuZ: a line "rel(...)" without '=' opens a block; following lines that
  // contain '=' are tuples; each field's value is whatever follows its last '='.
  std::set<std::string> wanted(outputs.begin(), outputs.end());
  for (const auto& rel : outputs) out.ensure(rel);
  std::istringstream in(stdout_text);
  std::string line, current;
  while (std::getline(in, line)) {
    auto t = trim(line);
    if (t.empty()) continue;
    if (t.find('=') == std::string::npos) {
      auto paren = t.find('(');
      std::string name = trim(t.substr(0, paren));
      current = wanted.count(name) ? name : std::string();
      continue;
    }
    if (current.empty()) continue;
    auto kinds = kinds_of(current);
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      auto pos = t.find(',', start);
      fields.push_back(t.substr(start, pos - start));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    if (!kinds || fields.size() != kinds->size()) {
      if (error) *error = "tuple arity mismatch in '" + t + "'";
      return std::nullopt;
    }
    Tuple tup;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      auto eq = fields[i].rfind('=');
      auto v = parse_value(trim(fields[i].substr(eq + 1)), (*kinds)[i]);
      if (!v) {
        if (error) *error = "bad value in '" + t + "'";
        return std::nullopt;
      }
      tup.push_back(std::move(*v));
    }
    out.insert(current, std::move(tup));
  }
  return out;
}

std::string render_readable(const Program& p) {
  std::ostringstream os;
  auto inputs = input_relations(p);
  for (const auto& d : p.decls) {
    os << souffle_decl(d, Role::Optimized, false) << "\n";
    if (inputs.count(d.name)) os << ".input " << d.name << "\n";
    if (p.is_output(d.name)) os << ".output " << d.name << "\n";
  }
  os << "\n";
  for (const auto& [rel, tuples] : p.edb)
    for (const auto& t : tuples) {
      os << rel << "(";
      for (std::size_t i = 0; i < t.size(); ++i) {
        if (i) os << ", ";
        os << souffle_const(t[i]);
      }
      os << ").\n";
    }
  for (const auto& r : p.rules) os << souffle_rule(r) << "  // r" << r.id << "\n";
  for (const auto& s : p.subsumptions) os << souffle_subsumption(s) << "\n";
  return os.str();
}

}  // namespace deopt
