#include "deopt/discrepancy.hpp"

#include <stdexcept>

#include "ir_json_internal.hpp"

namespace deopt {

using detail::json;

std::string_view bug_kind_name(BugKind k) {
  switch (k) {
    case BugKind::Logic: return "logic";
    case BugKind::SemanticErrorUnexpected: return "semantic_error_unexpected";
    case BugKind::Crash: return "crash";
    case BugKind::Hang: return "hang";
  }
  return "?";
}

std::optional<BugKind> parse_bug_kind(std::string_view s) {
  for (auto k : {BugKind::Logic, BugKind::SemanticErrorUnexpected, BugKind::Crash, BugKind::Hang})
    if (bug_kind_name(k) == s) return k;
  return std::nullopt;
}

std::optional<BugReport> check_discrepancy(const TupleSet& oracle, const RunOutcome& optimized,
                                           const std::string& output_rel) {
  BugReport r;
  r.output_rel = output_rel;
  r.oracle = oracle;
  r.stdout_text = optimized.stdout_text;
  r.stderr_text = optimized.stderr_text;
  r.detail = optimized.describe();
  switch (optimized.result.index()) {
    case 0: {
      r.diff = diff_tuple_sets(oracle, optimized.facts().get(output_rel));
      if (r.diff.equal()) return std::nullopt;
      r.kind = BugKind::Logic;
      r.optimized = optimized.facts();
      r.detail = std::to_string(r.diff.only_in_a.size()) + " missing, " + std::to_string(r.diff.only_in_b.size()) +
                 " unexpected";
      return r;
    }
    case 1:
      if (optimized.expected_error()) return std::nullopt;
      r.kind = BugKind::SemanticErrorUnexpected;
      return r;
    case 2: r.kind = BugKind::Crash; return r;
    case 3: r.kind = BugKind::Hang; return r;
    default: r.kind = BugKind::SemanticErrorUnexpected; return r;
  }
}

std::string report_to_json_text(const BugReport& r) {
  json stable = json::object();
  for (const auto& [id, tuples] : r.stable) stable[std::to_string(id)] = detail::tuples_to_json(tuples);
  json engine = r.engine.empty() ? json() : json::parse(r.engine, nullptr, false);
  json j{{"kind", std::string(bug_kind_name(r.kind))},
         {"seed", r.seed},
         {"iteration", r.iteration},
         {"rule_index", r.rule_index},
         {"phase", r.phase},
         {"engine", engine},
         {"output_rel", r.output_rel},
         {"program", detail::program_to_json(r.program)},
         {"stable_facts", stable},
         {"oracle", detail::tuples_to_json(r.oracle)},
         {"optimized", r.optimized ? detail::facts_to_json(*r.optimized) : json()},
         {"missing", detail::tuples_to_json(r.diff.only_in_a)},
         {"unexpected", detail::tuples_to_json(r.diff.only_in_b)},
         {"stdout", r.stdout_text},
         {"stderr", r.stderr_text},
         {"detail", r.detail},
         {"reduced", r.reduced ? detail::program_to_json(*r.reduced) : json()},
         {"reduction_failed", r.reduction_failed}};
  return j.dump(2) + "\n";
}

std::optional<BugReport> report_from_json_text(const std::string& text, std::string* error) {
  try {
    auto j = json::parse(text);
    BugReport r;
    auto kind = parse_bug_kind(j.at("kind").get<std::string>());
    if (!kind) throw std::runtime_error("unknown report kind");
    r.kind = *kind;
    r.seed = j.at("seed").get<std::uint64_t>();
    r.iteration = j.at("iteration").get<std::uint64_t>();
    r.rule_index = j.at("rule_index").get<RuleId>();
    r.phase = j.value("phase", std::string("optimized"));
    if (!j["engine"].is_null()) r.engine = j["engine"].dump();
    r.output_rel = j.at("output_rel").get<std::string>();
    r.program = detail::program_from_json(j.at("program"));
    std::vector<Kind> kinds;
    if (const auto* d = r.program.find_decl(r.output_rel)) kinds = d->kinds();
    for (const auto& [id, rows] : j.at("stable_facts").items()) {
      const Rule* rule = r.program.find_rule(std::stoull(id));
      if (!rule) continue;
      const auto* d = r.program.find_decl(rule->head.relation);
      if (d) r.stable[rule->id] = detail::tuples_from_json(rows, d->kinds());
    }
    r.oracle = detail::tuples_from_json(j.at("oracle"), kinds);
    if (!j["optimized"].is_null()) {
      FactStore f;
      for (const auto& [rel, rows] : j["optimized"].items()) {
        const auto* d = r.program.find_decl(rel);
        if (d) f.set(rel, detail::tuples_from_json(rows, d->kinds()));
      }
      r.optimized = std::move(f);
    }
    r.diff.only_in_a = detail::tuples_from_json(j.at("missing"), kinds);
    r.diff.only_in_b = detail::tuples_from_json(j.at("unexpected"), kinds);
    r.stdout_text = j.value("stdout", std::string());
    r.stderr_text = j.value("stderr", std::string());
    r.detail = j.value("detail", std::string());
    if (!j["reduced"].is_null()) r.reduced = detail::program_from_json(j["reduced"]);
    r.reduction_failed = j.value("reduction_failed", false);
    return r;
  } catch (const std::exception& e) {
    if (error) *error = e.what();
    return std::nullopt;
  }
}

}  // namespace deopt
