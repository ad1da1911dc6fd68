#include "deopt/eval.hpp"

#include <cmath>
#include <limits>

namespace deopt {

std::string_view semantic_error_code(SemanticErrorKind kind) {
  switch (kind) {
    case SemanticErrorKind::DivZero: return "div_zero";
    case SemanticErrorKind::ModZero: return "mod_zero";
    case SemanticErrorKind::TypeMismatch: return "type_mismatch";
    case SemanticErrorKind::UnboundVariable: return "unbound_variable";
  }
  return "?";
}

SemanticError::SemanticError(SemanticErrorKind kind, const std::string& detail)
    : std::runtime_error(std::string(semantic_error_code(kind)) + ": " + detail), kind_(kind) {}

namespace {

std::uint64_t upow(std::uint64_t base, std::uint64_t exp) {
  std::uint64_t result = 1;
  while (exp) {
    if (exp & 1) result *= base;
    base *= base;
    exp >>= 1;
  }
  return result;
}

std::int64_t spow(std::int64_t base, std::int64_t exp) {
  if (exp >= 0)
    return static_cast<std::int64_t>(upow(static_cast<std::uint64_t>(base), static_cast<std::uint64_t>(exp)));
  // Integer reciprocal truncated toward zero.
  if (base == 0) throw SemanticError(SemanticErrorKind::DivZero, "0 raised to a negative power");
  if (base == 1) return 1;
  if (base == -1) return (exp % 2 == 0) ? 1 : -1;
  return 0;
}

std::int64_t wrap_add(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) + static_cast<std::uint64_t>(b));
}
std::int64_t wrap_sub(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) - static_cast<std::uint64_t>(b));
}
std::int64_t wrap_mul(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(b));
}

[[noreturn]] void mismatch(const Value& a, const Value& b) {
  throw SemanticError(SemanticErrorKind::TypeMismatch,
                      std::string(kind_name(a.kind())) + " vs " + std::string(kind_name(b.kind())));
}

}  // namespace

Value apply_neg(const Value& v) {
  switch (v.kind()) {
    case Kind::Signed: return Value::signed_int(wrap_sub(0, v.as_signed()));
    case Kind::Unsigned: return Value::unsigned_int(0 - v.as_unsigned());
    case Kind::Float: return Value::floating(-v.as_float());
    case Kind::Symbol: break;
  }
  throw SemanticError(SemanticErrorKind::TypeMismatch, "negation of a symbol");
}

Value apply_arith(ArithOp op, const Value& a, const Value& b) {
  if (op == ArithOp::Neg) return apply_neg(a);
  if (a.kind() != b.kind() || a.kind() == Kind::Symbol) mismatch(a, b);
  switch (a.kind()) {
    case Kind::Signed: {
      std::int64_t x = a.as_signed(), y = b.as_signed();
      switch (op) {
        case ArithOp::Add: return Value::signed_int(wrap_add(x, y));
        case ArithOp::Sub: return Value::signed_int(wrap_sub(x, y));
        case ArithOp::Mul: return Value::signed_int(wrap_mul(x, y));
        case ArithOp::Div:
          if (y == 0) throw SemanticError(SemanticErrorKind::DivZero, std::to_string(x) + " / 0");
          if (x == std::numeric_limits<std::int64_t>::min() && y == -1) return Value::signed_int(x);
          return Value::signed_int(x / y);
        case ArithOp::Mod:
          if (y == 0) throw SemanticError(SemanticErrorKind::ModZero, std::to_string(x) + " % 0");
          if (y == -1) return Value::signed_int(0);
          return Value::signed_int(x % y);
        case ArithOp::Pow: return Value::signed_int(spow(x, y));
        case ArithOp::Neg: break;
      }
      break;
    }
    case Kind::Unsigned: {
      std::uint64_t x = a.as_unsigned(), y = b.as_unsigned();
      switch (op) {
        case ArithOp::Add: return Value::unsigned_int(x + y);
        case ArithOp::Sub: return Value::unsigned_int(x - y);
        case ArithOp::Mul: return Value::unsigned_int(x * y);
        case ArithOp::Div:
          if (y == 0) throw SemanticError(SemanticErrorKind::DivZero, std::to_string(x) + " / 0");
          return Value::unsigned_int(x / y);
        case ArithOp::Mod:
          if (y == 0) throw SemanticError(SemanticErrorKind::ModZero, std::to_string(x) + " % 0");
          return Value::unsigned_int(x % y);
        case ArithOp::Pow: return Value::unsigned_int(upow(x, y));
        case ArithOp::Neg: break;
      }
      break;
    }
    case Kind::Float: {
      double x = a.as_float(), y = b.as_float();
      switch (op) {
        case ArithOp::Add: return Value::floating(x + y);
        case ArithOp::Sub: return Value::floating(x - y);
        case ArithOp::Mul: return Value::floating(x * y);
        case ArithOp::Div:
          if (y == 0.0) throw SemanticError(SemanticErrorKind::DivZero, format_float(x) + " / 0");
          return Value::floating(x / y);
        case ArithOp::Mod:
          if (y == 0.0) throw SemanticError(SemanticErrorKind::ModZero, format_float(x) + " % 0");
          return Value::floating(std::fmod(x, y));
        case ArithOp::Pow: return Value::floating(std::pow(x, y));
        case ArithOp::Neg: break;
      }
      break;
    }
    case Kind::Symbol: break;
  }
  mismatch(a, b);
}

Value eval_term(const Term& term, const Binding& binding) {
  switch (term.tag) {
    case Term::Tag::Const: return term.value;
    case Term::Tag::Var: {
      auto it = binding.find(term.name);
      if (it == binding.end()) throw SemanticError(SemanticErrorKind::UnboundVariable, term.name);
      return it->second;
    }
    case Term::Tag::Wildcard:
      throw SemanticError(SemanticErrorKind::UnboundVariable, "wildcard in expression");
    case Term::Tag::Arith: {
      if (term.op == ArithOp::Neg) return apply_neg(eval_term(term.args.at(0), binding));
      Value lhs = eval_term(term.args.at(0), binding);
      Value rhs = eval_term(term.args.at(1), binding);
      return apply_arith(term.op, lhs, rhs);
    }
  }
  throw SemanticError(SemanticErrorKind::UnboundVariable, "malformed term");
}

namespace {

template <class T>
bool cmp(CmpOp op, const T& a, const T& b) {
  switch (op) {
    case CmpOp::Lt: return a < b;
    case CmpOp::Gt: return a > b;
    case CmpOp::Le: return a <= b;
    case CmpOp::Ge: return a >= b;
    case CmpOp::Eq: return a == b;
    case CmpOp::Ne: return a != b;
  }
  return false;
}

}  // namespace

bool compare_values(CmpOp op, const Value& a, const Value& b) {
  if (a.kind() != b.kind()) mismatch(a, b);
  return cmp(op, a, b);
}

bool compare_numeric(CmpOp op, const Value& a, const Value& b) {
  if (a.kind() != b.kind()) mismatch(a, b);
  if (a.kind() == Kind::Float) return cmp(op, a.as_float(), b.as_float());
  return cmp(op, a, b);
}

}  // namespace deopt
