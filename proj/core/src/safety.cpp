#include "deopt/safety.hpp"

#include <set>

namespace deopt {

namespace {

struct PlanState {
  std::vector<std::size_t> order;
  std::set<std::string> bound;
  bool complete = false;
};

std::set<std::string> direct_vars(const Atom& a) {
  std::set<std::string> out;
  for (const auto& t : a.args)
    if (t.is_var()) out.insert(t.name);
  return out;
}

std::set<std::string> arith_vars(const Atom& a) {
  std::set<std::string> out;
  for (const auto& t : a.args)
    if (t.is_arith()) {
      auto v = var_set(t);
      out.insert(v.begin(), v.end());
    }
  return out;
}

bool subset(const std::set<std::string>& a, const std::set<std::string>& b) {
  for (const auto& x : a)
    if (!b.count(x)) return false;
  return true;
}

PlanState run_planner(const Rule& rule) {
  PlanState st;
  const std::size_t n = rule.body.size();
  std::vector<bool> done(n, false);

  auto flush_filters = [&] {
    for (std::size_t i = 0; i < n; ++i) {
      if (done[i]) continue;
      const auto* a = as_atom(rule.body[i]);
      if (a && !a->negated) continue;
      if (subset(var_set(rule.body[i]), st.bound)) {
        done[i] = true;
        st.order.push_back(i);
      }
    }
  };

  flush_filters();
  for (;;) {
    bool progressed = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (done[i]) continue;
      const auto* a = as_atom(rule.body[i]);
      if (!a || a->negated) continue;
      auto direct = direct_vars(*a);
      std::set<std::string> avail = st.bound;
      avail.insert(direct.begin(), direct.end());
      if (!subset(arith_vars(*a), avail)) continue;
      done[i] = true;
      st.order.push_back(i);
      st.bound = std::move(avail);
      progressed = true;
      break;
    }
    if (!progressed) break;
    flush_filters();
  }
  st.complete = st.order.size() == n;
  return st;
}

}  // namespace

std::optional<BodyPlan> plan_body(const Rule& rule) {
  auto st = run_planner(rule);
  if (!st.complete) return std::nullopt;
  if (!subset(var_set(Literal{rule.head}), st.bound)) return std::nullopt;
  return BodyPlan{std::move(st.order)};
}

std::optional<std::string> check_safety(const Rule& rule) {
  auto st = run_planner(rule);
  std::vector<std::string> vars;
  collect_vars(rule.head, vars);
  for (const auto& l : rule.body) collect_vars(l, vars);
  for (const auto& v : vars)
    if (!st.bound.count(v)) return v;
  return std::nullopt;
}

}  // namespace deopt
