#include "deopt/grammar_check.hpp"

#include <cctype>
#include <set>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "deopt/ir_json.hpp"

namespace deopt {

namespace {

enum class Tok : std::uint8_t { Ident, Number, String, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
};

struct SyntaxError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<Token> tokenize(const std::string& line) {
  static const char* const kTwo[] = {":-", "<=", ">=", "!=", "==", "<-", ":="};
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    char c = line[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < line.size() && (std::isalnum(static_cast<unsigned char>(line[j])) || line[j] == '_')) ++j;
      out.push_back({Tok::Ident, line.substr(i, j - i)});
      i = j;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < line.size() && std::isdigit(static_cast<unsigned char>(line[j]))) ++j;
      if (j + 1 < line.size() && line[j] == '.' && std::isdigit(static_cast<unsigned char>(line[j + 1]))) {
        ++j;
        while (j < line.size() && std::isdigit(static_cast<unsigned char>(line[j]))) ++j;
      }
      if (j < line.size() && (line[j] == 'e' || line[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < line.size() && (line[k] == '+' || line[k] == '-')) ++k;
        if (k < line.size() && std::isdigit(static_cast<unsigned char>(line[k]))) {
          j = k;
          while (j < line.size() && std::isdigit(static_cast<unsigned char>(line[j]))) ++j;
        }
      }
      out.push_back({Tok::Number, line.substr(i, j - i)});
      i = j;
      continue;
    }
    if (c == '"') {
      auto end = line.find('"', i + 1);
      if (end == std::string::npos) throw SyntaxError("unterminated string");
      out.push_back({Tok::String, line.substr(i + 1, end - i - 1)});
      i = end + 1;
      continue;
    }
    bool two = false;
    for (const char* t : kTwo)
      if (line.compare(i, 2, t) == 0) {
        out.push_back({Tok::Punct, t});
        i += 2;
        two = true;
        break;
      }
    if (two) continue;
    if (std::string("()[],.:!<>=+-*/%^?").find(c) == std::string::npos)
      throw SyntaxError(std::string("unexpected character '") + c + "'");
    out.push_back({Tok::Punct, std::string(1, c)});
    ++i;
  }
  out.push_back({Tok::End, {}});
  return out;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }
  bool at_end() const { return peek().kind == Tok::End; }
  bool is(const char* punct, std::size_t ahead = 0) const {
    return peek(ahead).kind == Tok::Punct && peek(ahead).text == punct;
  }
  bool accept(const char* punct) {
    if (!is(punct)) return false;
    ++pos_;
    return true;
  }
  void expect(const char* punct) {
    if (!accept(punct)) fail(std::string("expected '") + punct + "'");
  }
  std::string ident() {
    if (peek().kind != Tok::Ident) fail("expected identifier");
    return toks_[pos_++].text;
  }
  void keyword(const char* kw) {
    if (peek().kind != Tok::Ident || peek().text != kw) fail(std::string("expected '") + kw + "'");
    ++pos_;
  }
  void finish() {
    if (!at_end()) fail("trailing input");
  }
  [[noreturn]] void fail(const std::string& what) const {
    const auto& t = peek();
    throw SyntaxError(what + (t.kind == Tok::End ? " at end of line" : " near '" + t.text + "'"));
  }

  // Arithmetic with the usual precedence. `calls` admits f(a, b) forms.
  void expr(bool calls) {
    term(calls);
    while (is("+") || is("-")) {
      ++pos_;
      term(calls);
    }
  }

  static bool is_cmp(const Token& t, bool cozo) {
    if (t.kind != Tok::Punct) return false;
    static const std::set<std::string> base = {"<", ">", "<=", ">=", "!="};
    if (base.count(t.text)) return true;
    return cozo ? (t.text == "==" || t.text == "=") : t.text == "=";
  }

 private:
  void term(bool calls) {
    factor(calls);
    while (is("*") || is("/") || is("%") || is("^")) {
      ++pos_;
      factor(calls);
    }
  }

  void factor(bool calls) {
    if (accept("-")) return factor(calls);
    if (accept("(")) {
      expr(calls);
      expect(")");
      return;
    }
    const auto& t = peek();
    if (t.kind == Tok::Number || t.kind == Tok::String) {
      ++pos_;
      return;
    }
    if (t.kind == Tok::Ident) {
      ++pos_;
      if (calls && accept("(")) {
        expr(calls);
        while (accept(",")) expr(calls);
        expect(")");
      }
      return;
    }
    fail("expected term");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------- Souffle --

void souffle_args(Parser& p) {
  p.expect("(");
  if (!p.accept(")")) {
    p.expr(false);
    while (p.accept(",")) p.expr(false);
    p.expect(")");
  }
}

void souffle_atom(Parser& p) {
  p.ident();
  souffle_args(p);
}

void souffle_literal(Parser& p) {
  if (p.accept("!")) return souffle_atom(p);
  if (p.peek().kind == Tok::Ident && p.is("(", 1)) return souffle_atom(p);
  p.expr(false);
  if (!Parser::is_cmp(p.peek(), false)) p.fail("expected comparison");
  p.accept(p.peek().text.c_str());
  p.expr(false);
}

void souffle_line(Parser& p) {
  static const std::set<std::string> kTypes = {"number", "unsigned", "float", "symbol"};
  if (p.accept(".")) {
    auto dir = p.ident();
    if (dir == "decl") {
      p.ident();
      p.expect("(");
      if (!p.accept(")")) {
        do {
          p.ident();
          p.expect(":");
          if (!kTypes.count(p.ident())) p.fail("unknown attribute type");
        } while (p.accept(","));
        p.expect(")");
      }
      while (!p.at_end()) p.ident();
      return;
    }
    if (dir == "input" || dir == "output") {
      p.ident();
      return p.finish();
    }
    p.fail("unknown directive");
  }
  souffle_atom(p);
  if (p.accept("<=")) {
    souffle_atom(p);
    if (p.accept(":-")) {
      do {
        p.expr(false);
        if (!Parser::is_cmp(p.peek(), false)) p.fail("expected comparison");
        p.accept(p.peek().text.c_str());
        p.expr(false);
      } while (p.accept(","));
    }
  } else if (p.accept(":-")) {
    do souffle_literal(p);
    while (p.accept(","));
  }
  p.expect(".");
  p.finish();
}

// ------------------------------------------------------------------- Cozo --

void cozo_list(Parser& p) {
  p.expect("[");
  if (!p.accept("]")) {
    p.expr(true);
    while (p.accept(",")) p.expr(true);
    p.expect("]");
  }
}

void cozo_line(Parser& p) {
  if (!p.accept("?")) p.ident();
  cozo_list(p);
  if (p.accept("<-")) {
    p.expect("[");
    if (!p.accept("]")) {
      do cozo_list(p);
      while (p.accept(","));
      p.expect("]");
    }
    return p.finish();
  }
  p.expect(":=");
  do {
    if (p.peek().kind == Tok::Ident && p.peek().text == "not") {
      p.ident();
      p.ident();
      cozo_list(p);
    } else if (p.peek().kind == Tok::Ident && p.is("[", 1)) {
      p.ident();
      cozo_list(p);
    } else {
      p.expr(true);
      if (!Parser::is_cmp(p.peek(), true)) p.fail("expected comparison");
      p.accept(p.peek().text.c_str());
      p.expr(true);
    }
  } while (p.accept(","));
  p.finish();
}

// -------------------------------------------------------------------- MuZ --

void muz_line(Parser& p, bool first) {
  if (first) {
    p.keyword("Z");
    if (p.peek().kind != Tok::Number) p.fail("expected domain size");
    p.accept(p.peek().text.c_str());
    return p.finish();
  }
  p.ident();
  p.expect("(");
  // Declaration: name(x:Z, ...) [input] [printtuples]
  bool decl = p.is(")") ? !p.is(".", 1) && !p.is(":-", 1) : p.peek().kind == Tok::Ident && p.is(":", 1);
  if (decl) {
    if (!p.accept(")")) {
      do {
        p.ident();
        p.expect(":");
        p.keyword("Z");
      } while (p.accept(","));
      p.expect(")");
    }
    while (!p.at_end()) {
      auto kw = p.ident();
      if (kw != "input" && kw != "printtuples") p.fail("unknown relation marker");
    }
    return;
  }
  if (!p.accept(")")) {
    p.expr(false);
    while (p.accept(",")) p.expr(false);
    p.expect(")");
  }
  if (p.accept(":-")) {
    do {
      if (p.accept("!") || (p.peek().kind == Tok::Ident && p.is("(", 1))) {
        souffle_atom(p);
      } else {
        p.expr(false);
        if (!Parser::is_cmp(p.peek(), false)) p.fail("expected comparison");
        p.accept(p.peek().text.c_str());
        p.expr(false);
      }
    } while (p.accept(","));
  }
  p.expect(".");
  p.finish();
}

}  // namespace

std::optional<std::string> check_syntax(Dialect d, const std::string& text) {
  if (d == Dialect::Embedded) {
    std::string err;
    if (!program_from_json_text(text, &err)) return "invalid program JSON: " + err;
    return std::nullopt;
  }
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto c = line.find("//"); c != std::string::npos) line.erase(c);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      Parser p(tokenize(line));
      switch (d) {
        case Dialect::SouffleLike: souffle_line(p); break;
        case Dialect::CozoLike: cozo_line(p); break;
        case Dialect::MuZLike: muz_line(p, first); break;
        case Dialect::Embedded: break;
      }
    } catch (const SyntaxError& e) {
      return "line " + std::to_string(lineno) + ": " + e.what();
    }
    first = false;
  }
  if (d == Dialect::MuZLike && first) return "missing domain header";
  return std::nullopt;
}

}  // namespace deopt
