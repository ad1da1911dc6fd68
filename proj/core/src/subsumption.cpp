#include "deopt/engine.hpp"

namespace deopt {

namespace {

bool bind_pattern(const std::vector<Term>& pattern, const Tuple& t, Binding& b) {
  if (pattern.size() != t.size()) return false;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const Term& term = pattern[i];
    if (term.is_const()) {
      if (!(term.value == t[i])) return false;
    } else if (term.is_var()) {
      auto [it, fresh] = b.emplace(term.name, t[i]);
      if (!fresh && !(it->second == t[i])) return false;
    }
  }
  for (std::size_t i = 0; i < t.size(); ++i)
    if (pattern[i].is_arith() && !(eval_term(pattern[i], b) == t[i])) return false;
  return true;
}

bool dominated(const Tuple& lo, const Tuple& hi, const SubsumptionRule& sub) {
  Binding b;
  if (!bind_pattern(sub.dominated, lo, b)) return false;
  if (!bind_pattern(sub.dominating, hi, b)) return false;
  for (const auto& c : sub.condition)
    if (!compare_values(c.op, eval_term(c.lhs, b), eval_term(c.rhs, b))) return false;
  return true;
}

}  // namespace

TupleSet apply_subsumptions(const TupleSet& facts, const std::vector<const SubsumptionRule*>& subs) {
  TupleSet out;
  for (const auto& lo : facts) {
    bool drop = false;
    for (const auto* sub : subs) {
      for (const auto& hi : facts) {
        if (&hi == &lo) continue;
        if (dominated(lo, hi, *sub)) {
          drop = true;
          break;
        }
      }
      if (drop) break;
    }
    if (!drop) out.insert(out.end(), lo);
  }
  return out;
}

TupleSet apply_subsumption(const TupleSet& facts, const SubsumptionRule& sub) {
  return apply_subsumptions(facts, {&sub});
}

}  // namespace deopt
