#include <algorithm>

#include "deopt/engine.hpp"

namespace deopt {

std::string_view bug_name(BugId id) {
  switch (id) {
    case BugId::SeminaiveDelta: return "BUG_SEMINAIVE_DELTA";
    case BugId::MagicNegZero: return "BUG_MAGIC_NEGZERO";
    case BugId::SubsumeUnderMagic: return "BUG_SUBSUME_UNDER_MAGIC";
    case BugId::InlineDropLiteral: return "BUG_INLINE_DROP_LITERAL";
  }
  return "?";
}

const std::vector<BugId>& all_bugs() {
  static const std::vector<BugId> kAll = {BugId::SeminaiveDelta, BugId::MagicNegZero, BugId::SubsumeUnderMagic,
                                          BugId::InlineDropLiteral};
  return kAll;
}

std::optional<BugId> parse_bug(std::string_view name) {
  for (auto id : all_bugs())
    if (bug_name(id) == name) return id;
  return std::nullopt;
}

std::vector<OptConfig> all_flag_combinations() {
  std::vector<OptConfig> out;
  for (int mask = 0; mask < 8; ++mask) {
    OptConfig c;
    c.enable_magic = mask & 1;
    c.enable_inline = mask & 2;
    c.enable_subsumption = mask & 4;
    out.push_back(c);
  }
  return out;
}

std::string EngineError::code() const {
  switch (kind) {
    case EngineErrorKind::Unstratifiable: return "unstratifiable";
    case EngineErrorKind::ResourceLimit: return "resource_limit";
    case EngineErrorKind::InvalidProgram: return "invalid_program";
    case EngineErrorKind::Semantic:
      return semantic ? std::string(semantic_error_code(*semantic)) : "semantic";
  }
  return "?";
}

bool is_internal_relation(const std::string& rel) { return rel.rfind(kInternalPrefix, 0) == 0; }

std::variant<std::map<std::string, int>, std::string> relation_levels(const Program& program) {
  std::map<std::string, int> level;
  for (const auto& d : program.decls) level[d.name] = 0;
  for (const auto& [rel, tuples] : program.edb) level[rel];

  struct Edge {
    std::string src, dst;
    int weight;
  };
  std::vector<Edge> edges;
  for (const auto& r : program.rules) {
    level[r.head.relation];
    for (const auto& l : r.body) {
      const auto* a = as_atom(l);
      if (!a) continue;
      level[a->relation];
      int w = (a->negated || program.has_subsumption(a->relation)) ? 1 : 0;
      edges.push_back({a->relation, r.head.relation, w});
    }
  }

  // Longest-path relaxation; a cycle through a weighted edge never settles.
  const std::size_t n = level.size();
  for (std::size_t pass = 0;; ++pass) {
    bool changed = false;
    std::string culprit;
    for (const auto& e : edges) {
      int want = level[e.src] + e.weight;
      if (level[e.dst] < want) {
        level[e.dst] = want;
        changed = true;
        culprit = e.dst;
      }
    }
    if (!changed) break;
    if (pass > n) return "negation or subsumption inside recursion through " + culprit;
  }
  return level;
}

}  // namespace deopt
