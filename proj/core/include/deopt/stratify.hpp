#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "deopt/program.hpp"

namespace deopt {

/// src -> dst when the head relation of rule src occurs in the body of dst.
struct PrecEdge {
  RuleId src = 0;
  RuleId dst = 0;
  bool negative = false;

  friend auto operator<=>(const PrecEdge&, const PrecEdge&) = default;
};

struct PrecedenceGraph {
  std::set<RuleId> nodes;
  std::set<PrecEdge> edges;

  std::vector<RuleId> successors(RuleId n) const;
  bool has_cycle() const;

  friend bool operator==(const PrecedenceGraph&, const PrecedenceGraph&) = default;
};

PrecedenceGraph build_graph(const Program& program);

/// Adds `rule` to a graph built for the program without it. Equivalent to
/// rebuilding from scratch.
void add_rule_to_graph(PrecedenceGraph& graph, const Program& program, const Rule& rule);

/// Subgraph induced by `root` and everything reachable from it.
PrecedenceGraph affected_subgraph(const PrecedenceGraph& graph, RuleId root);

struct CondensedNode {
  std::vector<RuleId> members;  // ascending
  bool has_negative_internal_edge = false;
  bool recursive = false;  // more than one member, or a self-loop
};

struct Condensation {
  std::vector<CondensedNode> nodes;
  std::set<std::pair<std::size_t, std::size_t>> edges;
  std::map<RuleId, std::size_t> node_of;
};

Condensation condense(const PrecedenceGraph& graph);

/// Longest-path layering of the condensation: the endpoints of every edge
/// land in different strata, lowest stratum first. Nodes inside a stratum are
/// ordered by their smallest rule id.
struct Stratification {
  Condensation condensation;
  std::vector<std::vector<std::size_t>> strata;  // indices into condensation.nodes

  /// Stratum index per rule.
  std::map<RuleId, std::size_t> stratum_of() const;
};

Stratification graph_stratify(const PrecedenceGraph& graph);

/// Elementary cycles (self-loops count, length 1). Counting stops at `cap`.
struct CycleStats {
  std::size_t count = 0;
  double mean_length = 0.0;
  bool truncated = false;
};
CycleStats cycle_statistics(const PrecedenceGraph& graph, std::size_t cap = 10000);

std::string to_dot(const PrecedenceGraph& graph, const Program* program = nullptr);

}  // namespace deopt
