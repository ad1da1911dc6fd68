#include "dl_text.hpp"

#include <cctype>
#include <map>
#include <stdexcept>

namespace deopt::testing {

namespace {

enum class Tok { Ident, Var, Number, String, Directive, Punct, End };

struct Token {
  Tok kind;
  std::string text;
};

std::vector<Token> tokenize(const std::string& s) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto at = [&](std::size_t k) { return k < s.size() ? s[k] : '\0'; };
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '/' && at(i + 1) == '/') {
      while (i < s.size() && s[i] != '\n') ++i;
      continue;
    }
    if (c == '.' && std::isalpha(static_cast<unsigned char>(at(i + 1)))) {
      std::size_t j = i + 1;
      while (j < s.size() && std::isalnum(static_cast<unsigned char>(s[j]))) ++j;
      out.push_back({Tok::Directive, s.substr(i, j - i)});
      i = j;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      if (at(j) == '.' && std::isdigit(static_cast<unsigned char>(at(j + 1)))) {
        ++j;
        while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      }
      if (at(j) == 'u') ++j;
      out.push_back({Tok::Number, s.substr(i, j - i)});
      i = j;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
      std::string word = s.substr(i, j - i);
      bool var = std::isupper(static_cast<unsigned char>(c)) || c == '_';
      out.push_back({var ? Tok::Var : Tok::Ident, word});
      i = j;
      continue;
    }
    if (c == '"') {
      std::size_t j = s.find('"', i + 1);
      if (j == std::string::npos) throw std::runtime_error("unterminated string");
      out.push_back({Tok::String, s.substr(i + 1, j - i - 1)});
      i = j + 1;
      continue;
    }
    static const char* kTwo[] = {":-", "<=", ">=", "!="};
    bool two = false;
    for (const char* p : kTwo)
      if (c == p[0] && at(i + 1) == p[1]) {
        out.push_back({Tok::Punct, p});
        i += 2;
        two = true;
        break;
      }
    if (two) continue;
    if (std::string("(),.:<>=!+-*/%^").find(c) == std::string::npos)
      throw std::runtime_error(std::string("unexpected character '") + c + "'");
    out.push_back({Tok::Punct, std::string(1, c)});
    ++i;
  }
  out.push_back({Tok::End, ""});
  return out;
}

// A term whose constants are resolved once the kind is known.
struct RawTerm {
  Term::Tag tag = Term::Tag::Wildcard;
  std::string text;  // var name or literal
  Tok literal = Tok::Number;
  ArithOp op = ArithOp::Add;
  std::vector<RawTerm> args;
};

Value literal_value(const RawTerm& t, std::optional<Kind> kind) {
  std::string text = t.text;
  if (t.literal == Tok::String) return Value::symbol(text);
  bool unsigned_suffix = !text.empty() && text.back() == 'u';
  if (unsigned_suffix) text.pop_back();
  Kind k;
  if (kind)
    k = *kind;
  else if (unsigned_suffix)
    k = Kind::Unsigned;
  else if (text.find('.') != std::string::npos)
    k = Kind::Float;
  else
    k = Kind::Signed;
  auto v = parse_value(text, k);
  if (!v) throw std::runtime_error("bad literal '" + text + "' for kind " + std::string(kind_name(k)));
  return *v;
}

Term resolve(const RawTerm& t, std::optional<Kind> kind) {
  switch (t.tag) {
    case Term::Tag::Var: return Term::var(t.text);
    case Term::Tag::Wildcard: return Term::wildcard();
    case Term::Tag::Const: return Term::constant(literal_value(t, kind));
    case Term::Tag::Arith: {
      std::vector<Term> args;
      for (const auto& a : t.args) args.push_back(resolve(a, kind));
      return Term::arith(t.op, std::move(args));
    }
  }
  return Term::wildcard();
}

std::optional<std::string> first_var(const RawTerm& t) {
  if (t.tag == Term::Tag::Var) return t.text;
  for (const auto& a : t.args)
    if (auto v = first_var(a)) return v;
  return std::nullopt;
}

struct RawAtom {
  std::string rel;
  std::vector<RawTerm> args;
  bool negated = false;
};

struct RawConstraint {
  CmpOp op;
  RawTerm lhs, rhs;
};

class Parser {
 public:
  explicit Parser(const std::string& text) : toks_(tokenize(text)) {}

  Program run() {
    while (peek().kind != Tok::End) statement();
    return std::move(p_);
  }

 private:
  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  Token next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  bool accept(const std::string& punct) {
    if (peek().kind == Tok::Punct && peek().text == punct) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(const std::string& punct) {
    if (!accept(punct)) throw std::runtime_error("expected '" + punct + "' near '" + peek().text + "'");
  }
  std::string ident() {
    auto t = next();
    if (t.kind != Tok::Ident) throw std::runtime_error("expected a name near '" + t.text + "'");
    return t.text;
  }

  void statement() {
    if (peek().kind == Tok::Directive) {
      auto d = next().text;
      if (d == ".decl") return decl();
      if (d == ".output") {
        p_.outputs.push_back(ident());
        return;
      }
      throw std::runtime_error("unknown directive " + d);
    }
    RawAtom head = atom();
    if (accept("<=")) return subsumption(head);
    if (accept(":-")) return rule(head);
    expect(".");
    fact(head);
  }

  void decl() {
    RelationDecl d;
    d.name = ident();
    expect("(");
    if (!accept(")")) {
      do {
        auto an = ident();
        expect(":");
        auto kn = ident();
        auto k = parse_kind(kn);
        if (!k) throw std::runtime_error("unknown kind " + kn);
        d.attrs.push_back({an, *k});
      } while (accept(","));
      expect(")");
    }
    while (peek().kind == Tok::Ident && !(peek(1).kind == Tok::Punct && peek(1).text == "(")) d.annotations.insert(next().text);
    p_.decls.push_back(std::move(d));
  }

  const RelationDecl& decl_of(const std::string& rel) const {
    const auto* d = p_.find_decl(rel);
    if (!d) throw std::runtime_error("undeclared relation " + rel);
    return *d;
  }

  RawAtom atom() {
    RawAtom a;
    if (accept("!")) a.negated = true;
    a.rel = ident();
    expect("(");
    if (!accept(")")) {
      do a.args.push_back(expr());
      while (accept(","));
      expect(")");
    }
    if (a.args.size() != decl_of(a.rel).arity()) throw std::runtime_error("arity mismatch for " + a.rel);
    return a;
  }

  RawTerm expr() {
    RawTerm lhs = product();
    while (peek().kind == Tok::Punct && (peek().text == "+" || peek().text == "-")) {
      auto op = next().text == "+" ? ArithOp::Add : ArithOp::Sub;
      lhs = binary(op, std::move(lhs), product());
    }
    return lhs;
  }

  RawTerm product() {
    RawTerm lhs = unary();
    for (;;) {
      if (peek().kind != Tok::Punct) return lhs;
      const auto& t = peek().text;
      ArithOp op;
      if (t == "*")
        op = ArithOp::Mul;
      else if (t == "/")
        op = ArithOp::Div;
      else if (t == "%")
        op = ArithOp::Mod;
      else if (t == "^")
        op = ArithOp::Pow;
      else
        return lhs;
      next();
      lhs = binary(op, std::move(lhs), unary());
    }
  }

  static RawTerm binary(ArithOp op, RawTerm a, RawTerm b) {
    RawTerm t;
    t.tag = Term::Tag::Arith;
    t.op = op;
    t.args = {std::move(a), std::move(b)};
    return t;
  }

  RawTerm unary() {
    if (accept("-")) {
      if (peek().kind == Tok::Number) {
        RawTerm t = primary();
        t.text = "-" + t.text;
        return t;
      }
      RawTerm t;
      t.tag = Term::Tag::Arith;
      t.op = ArithOp::Neg;
      t.args = {unary()};
      return t;
    }
    return primary();
  }

  RawTerm primary() {
    if (accept("(")) {
      RawTerm t = expr();
      expect(")");
      return t;
    }
    auto t = next();
    RawTerm r;
    switch (t.kind) {
      case Tok::Var:
        r.tag = t.text == "_" ? Term::Tag::Wildcard : Term::Tag::Var;
        r.text = t.text;
        return r;
      case Tok::Number:
      case Tok::String:
        r.tag = Term::Tag::Const;
        r.text = t.text;
        r.literal = t.kind;
        return r;
      default: throw std::runtime_error("expected a term near '" + t.text + "'");
    }
  }

  std::optional<CmpOp> cmp_op() {
    if (peek().kind != Tok::Punct) return std::nullopt;
    std::string t = peek().text;
    if (t == "==") t = "=";
    auto op = parse_cmp_op(t);
    if (op) next();
    return op;
  }

  // Body literal: an atom (possibly negated) or a comparison.
  bool at_atom() const {
    if (peek().kind == Tok::Punct && peek().text == "!") return true;
    return peek().kind == Tok::Ident && peek(1).kind == Tok::Punct && peek(1).text == "(";
  }

  Atom finish_atom(const RawAtom& a) const {
    Atom out{a.rel, {}, a.negated};
    const auto& d = decl_of(a.rel);
    for (std::size_t i = 0; i < a.args.size(); ++i) out.args.push_back(resolve(a.args[i], d.attrs[i].second));
    return out;
  }

  Constraint finish_constraint(const RawConstraint& c, const std::map<std::string, Kind>& kinds) const {
    std::optional<Kind> k;
    for (const auto* side : {&c.lhs, &c.rhs})
      if (auto v = first_var(*side); v && kinds.count(*v)) {
        k = kinds.at(*v);
        break;
      }
    return Constraint{c.op, resolve(c.lhs, k), resolve(c.rhs, k), false};
  }

  static void note_kinds(const RawAtom& a, const RelationDecl& d, std::map<std::string, Kind>& kinds) {
    for (std::size_t i = 0; i < a.args.size(); ++i)
      if (a.args[i].tag == Term::Tag::Var) kinds.emplace(a.args[i].text, d.attrs[i].second);
  }

  void rule(const RawAtom& head) {
    std::vector<std::variant<RawAtom, RawConstraint>> body;
    do {
      if (at_atom()) {
        body.push_back(atom());
        continue;
      }
      RawConstraint c;
      c.lhs = expr();
      auto op = cmp_op();
      if (!op) throw std::runtime_error("expected a comparison near '" + peek().text + "'");
      c.op = *op;
      c.rhs = expr();
      body.push_back(std::move(c));
    } while (accept(","));
    expect(".");

    std::map<std::string, Kind> kinds;
    for (const auto& l : body)
      if (const auto* a = std::get_if<RawAtom>(&l); a && !a->negated) note_kinds(*a, decl_of(a->rel), kinds);
    Rule r;
    r.id = p_.rules.size();
    r.head = finish_atom(head);
    for (const auto& l : body) {
      if (const auto* a = std::get_if<RawAtom>(&l))
        r.body.push_back(finish_atom(*a));
      else
        r.body.push_back(finish_constraint(std::get<RawConstraint>(l), kinds));
    }
    p_.rules.push_back(std::move(r));
  }

  void subsumption(const RawAtom& dominated) {
    RawAtom dominating = atom();
    if (dominating.rel != dominated.rel) throw std::runtime_error("subsumption over two relations");
    std::vector<RawConstraint> conds;
    if (accept(":-")) {
      do {
        RawConstraint c;
        c.lhs = expr();
        auto op = cmp_op();
        if (!op) throw std::runtime_error("expected a comparison");
        c.op = *op;
        c.rhs = expr();
        conds.push_back(std::move(c));
      } while (accept(","));
    }
    expect(".");
    const auto& d = decl_of(dominated.rel);
    std::map<std::string, Kind> kinds;
    note_kinds(dominated, d, kinds);
    note_kinds(dominating, d, kinds);
    SubsumptionRule s;
    s.relation = dominated.rel;
    s.dominated = finish_atom(dominated).args;
    s.dominating = finish_atom(dominating).args;
    for (const auto& c : conds) s.condition.push_back(finish_constraint(c, kinds));
    p_.subsumptions.push_back(std::move(s));
  }

  void fact(const RawAtom& a) {
    Atom at = finish_atom(a);
    Tuple t;
    for (const auto& arg : at.args) {
      if (!arg.is_const()) throw std::runtime_error("fact for " + a.rel + " is not ground");
      t.push_back(arg.value);
    }
    p_.edb.insert(a.rel, std::move(t));
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  Program p_;
};

}  // namespace

Program parse_dl(const std::string& text) {
  Program p = Parser(text).run();
  // Declared relations without facts still count as inputs when no rule defines them.
  auto idb = p.idb_relations();
  for (const auto& d : p.decls)
    if (!idb.count(d.name)) p.edb.ensure(d.name);
  return p;
}

TupleSet ints(std::initializer_list<std::int64_t> values) {
  TupleSet out;
  for (auto v : values) out.insert({Value::signed_int(v)});
  return out;
}

TupleSet floats(std::initializer_list<double> values) {
  TupleSet out;
  for (auto v : values) out.insert({Value::floating(v)});
  return out;
}

}  // namespace deopt::testing
