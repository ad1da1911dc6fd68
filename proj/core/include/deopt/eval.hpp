#pragma once

#include <map>
#include <stdexcept>
#include <string>

#include "deopt/program.hpp"

namespace deopt {

enum class SemanticErrorKind : std::uint8_t { DivZero, ModZero, TypeMismatch, UnboundVariable };

/// Stable codes used by error catalogs: div_zero, mod_zero, type_mismatch,
/// unbound_variable.
std::string_view semantic_error_code(SemanticErrorKind kind);

class SemanticError : public std::runtime_error {
 public:
  SemanticError(SemanticErrorKind kind, const std::string& detail);
  SemanticErrorKind kind() const { return kind_; }

 private:
  SemanticErrorKind kind_;
};

using Binding = std::map<std::string, Value>;

/// Integers wrap modulo 2^64. Division and modulo by zero raise for every
/// kind. Operands must share a numeric kind. `rhs` is ignored for Neg.
Value apply_arith(ArithOp op, const Value& lhs, const Value& rhs);
Value apply_neg(const Value& v);

Value eval_term(const Term& term, const Binding& binding);

/// Comparison used by constraint evaluation: the total order on values, so
/// floats compare by IEEE totalOrder (-0.0 < 0.0, equality is bitwise).
/// Mixed kinds raise TypeMismatch.
bool compare_values(CmpOp op, const Value& lhs, const Value& rhs);

/// Plain IEEE numeric comparison (-0.0 == 0.0, NaN unordered). Only the
/// buggy range-scan path uses it.
bool compare_numeric(CmpOp op, const Value& lhs, const Value& rhs);

}  // namespace deopt
