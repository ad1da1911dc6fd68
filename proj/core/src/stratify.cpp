#include "deopt/stratify.hpp"

#include <algorithm>
#include <functional>

namespace deopt {

std::vector<RuleId> PrecedenceGraph::successors(RuleId n) const {
  std::vector<RuleId> out;
  for (auto it = edges.lower_bound(PrecEdge{n, 0, false}); it != edges.end() && it->src == n; ++it)
    if (out.empty() || out.back() != it->dst) out.push_back(it->dst);
  return out;
}

bool PrecedenceGraph::has_cycle() const {
  for (const auto& node : condense(*this).nodes)
    if (node.recursive) return true;
  return false;
}

namespace {

void add_edges_into(PrecedenceGraph& g, const Program& p, const Rule& dst) {
  for (const auto& l : dst.body) {
    const auto* a = as_atom(l);
    if (!a) continue;
    for (const auto& src : p.rules)
      if (src.head.relation == a->relation) g.edges.insert({src.id, dst.id, a->negated});
  }
}

}  // namespace

PrecedenceGraph build_graph(const Program& program) {
  PrecedenceGraph g;
  for (const auto& r : program.rules) g.nodes.insert(r.id);
  for (const auto& r : program.rules) add_edges_into(g, program, r);
  return g;
}

void add_rule_to_graph(PrecedenceGraph& g, const Program& program, const Rule& rule) {
  g.nodes.insert(rule.id);
  Program with = program;
  if (!with.find_rule(rule.id)) with.rules.push_back(rule);
  add_edges_into(g, with, rule);
  for (const auto& dst : with.rules)
    for (const auto& l : dst.body)
      if (const auto* a = as_atom(l); a && a->relation == rule.head.relation)
        g.edges.insert({rule.id, dst.id, a->negated});
}

PrecedenceGraph affected_subgraph(const PrecedenceGraph& graph, RuleId root) {
  PrecedenceGraph sub;
  if (!graph.nodes.count(root)) return sub;
  std::vector<RuleId> stack{root};
  sub.nodes.insert(root);
  while (!stack.empty()) {
    RuleId cur = stack.back();
    stack.pop_back();
    for (RuleId nxt : graph.successors(cur))
      if (sub.nodes.insert(nxt).second) stack.push_back(nxt);
  }
  for (const auto& e : graph.edges)
    if (sub.nodes.count(e.src) && sub.nodes.count(e.dst)) sub.edges.insert(e);
  return sub;
}

Condensation condense(const PrecedenceGraph& graph) {
  // Tarjan's algorithm, iterative over an index-based adjacency list.
  std::vector<RuleId> ids(graph.nodes.begin(), graph.nodes.end());
  std::map<RuleId, std::size_t> pos;
  for (std::size_t i = 0; i < ids.size(); ++i) pos[ids[i]] = i;
  std::vector<std::vector<std::size_t>> adj(ids.size());
  for (const auto& e : graph.edges) {
    auto s = pos.find(e.src), d = pos.find(e.dst);
    if (s != pos.end() && d != pos.end()) adj[s->second].push_back(d->second);
  }

  const std::size_t n = ids.size();
  constexpr std::size_t kUnvisited = SIZE_MAX;
  std::vector<std::size_t> index(n, kUnvisited), low(n, 0), comp(n, kUnvisited);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> sccs;
  std::size_t counter = 0;

  for (std::size_t start = 0; start < n; ++start) {
    if (index[start] != kUnvisited) continue;
    std::vector<std::pair<std::size_t, std::size_t>> work{{start, 0}};
    index[start] = low[start] = counter++;
    stack.push_back(start);
    on_stack[start] = true;
    while (!work.empty()) {
      auto& [v, next] = work.back();
      if (next < adj[v].size()) {
        std::size_t w = adj[v][next++];
        if (index[w] == kUnvisited) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          work.push_back({w, 0});
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      if (low[v] == index[v]) {
        std::vector<std::size_t> scc;
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp[w] = sccs.size();
          scc.push_back(w);
        } while (w != v);
        sccs.push_back(std::move(scc));
      }
      std::size_t done = v;
      work.pop_back();
      if (!work.empty()) low[work.back().first] = std::min(low[work.back().first], low[done]);
    }
  }

  // Renumber components by smallest member id for a stable layout.
  std::vector<std::size_t> order(sccs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto min_id = [&](std::size_t c) {
    RuleId m = UINT64_MAX;
    for (auto v : sccs[c]) m = std::min(m, ids[v]);
    return m;
  };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return min_id(a) < min_id(b); });
  std::vector<std::size_t> renum(sccs.size());
  for (std::size_t i = 0; i < order.size(); ++i) renum[order[i]] = i;

  Condensation c;
  c.nodes.resize(sccs.size());
  for (std::size_t v = 0; v < n; ++v) {
    std::size_t k = renum[comp[v]];
    c.nodes[k].members.push_back(ids[v]);
    c.node_of[ids[v]] = k;
  }
  for (auto& node : c.nodes) {
    std::sort(node.members.begin(), node.members.end());
    node.recursive = node.members.size() > 1;
  }
  for (const auto& e : graph.edges) {
    auto s = c.node_of.find(e.src), d = c.node_of.find(e.dst);
    if (s == c.node_of.end() || d == c.node_of.end()) continue;
    if (s->second == d->second) {
      auto& node = c.nodes[s->second];
      node.recursive = true;
      if (e.negative) node.has_negative_internal_edge = true;
    } else {
      c.edges.insert({s->second, d->second});
    }
  }
  return c;
}

std::map<RuleId, std::size_t> Stratification::stratum_of() const {
  std::map<RuleId, std::size_t> out;
  for (std::size_t s = 0; s < strata.size(); ++s)
    for (auto node : strata[s])
      for (auto id : condensation.nodes[node].members) out[id] = s;
  return out;
}

Stratification graph_stratify(const PrecedenceGraph& graph) {
  Stratification st;
  st.condensation = condense(graph);
  const auto& c = st.condensation;
  const std::size_t n = c.nodes.size();
  std::vector<std::vector<std::size_t>> preds(n);
  std::vector<std::size_t> indeg(n, 0);
  for (const auto& [s, d] : c.edges) {
    preds[d].push_back(s);
    ++indeg[d];
  }
  std::vector<std::size_t> depth(n, 0), topo;
  std::vector<std::size_t> ready;
  for (std::size_t i = 0; i < n; ++i)
    if (indeg[i] == 0) ready.push_back(i);
  std::vector<std::vector<std::size_t>> succ(n);
  for (const auto& [s, d] : c.edges) succ[s].push_back(d);
  while (!ready.empty()) {
    std::size_t v = ready.back();
    ready.pop_back();
    topo.push_back(v);
    for (auto w : succ[v]) {
      depth[w] = std::max(depth[w], depth[v] + 1);
      if (--indeg[w] == 0) ready.push_back(w);
    }
  }
  std::size_t layers = 0;
  for (std::size_t i = 0; i < n; ++i) layers = std::max(layers, depth[i] + 1);
  st.strata.assign(n == 0 ? 0 : layers, {});
  for (std::size_t i = 0; i < n; ++i) st.strata[depth[i]].push_back(i);
  // Node indices already follow ascending smallest member id.
  for (auto& layer : st.strata) std::sort(layer.begin(), layer.end());
  return st;
}

CycleStats cycle_statistics(const PrecedenceGraph& graph, std::size_t cap) {
  // Johnson's algorithm on the subgraph induced by nodes >= s, for each s.
  CycleStats stats;
  std::vector<RuleId> ids(graph.nodes.begin(), graph.nodes.end());
  const std::size_t n = ids.size();
  std::map<RuleId, std::size_t> pos;
  for (std::size_t i = 0; i < n; ++i) pos[ids[i]] = i;
  std::vector<std::vector<std::size_t>> adj(n);
  for (const auto& e : graph.edges) {
    auto s = pos.find(e.src), d = pos.find(e.dst);
    if (s == pos.end() || d == pos.end()) continue;
    auto& out = adj[s->second];
    if (std::find(out.begin(), out.end(), d->second) == out.end()) out.push_back(d->second);
  }

  std::size_t total_len = 0;
  std::vector<bool> blocked(n, false);
  std::vector<std::set<std::size_t>> bmap(n);
  std::vector<std::size_t> path;

  std::function<void(std::size_t)> unblock = [&](std::size_t u) {
    blocked[u] = false;
    auto pending = std::move(bmap[u]);
    bmap[u].clear();
    for (auto w : pending)
      if (blocked[w]) unblock(w);
  };

  for (std::size_t s = 0; s < n && !stats.truncated; ++s) {
    // Only nodes in s's strongly connected component (within >= s) matter;
    // restricting to >= s is enough for correctness.
    for (std::size_t i = s; i < n; ++i) {
      blocked[i] = false;
      bmap[i].clear();
    }
    std::function<bool(std::size_t)> circuit = [&](std::size_t v) -> bool {
      bool found = false;
      path.push_back(v);
      blocked[v] = true;
      for (auto w : adj[v]) {
        if (w < s || stats.truncated) continue;
        if (w == s) {
          ++stats.count;
          total_len += path.size();
          if (stats.count >= cap) stats.truncated = true;
          found = true;
        } else if (!blocked[w]) {
          if (circuit(w)) found = true;
        }
      }
      if (found) {
        unblock(v);
      } else {
        for (auto w : adj[v])
          if (w >= s) bmap[w].insert(v);
      }
      path.pop_back();
      return found;
    };
    circuit(s);
  }
  if (stats.count) stats.mean_length = static_cast<double>(total_len) / static_cast<double>(stats.count);
  return stats;
}

std::string to_dot(const PrecedenceGraph& graph, const Program* program) {
  std::string out = "digraph prec {\n";
  for (auto id : graph.nodes) {
    out += "  r" + std::to_string(id);
    if (program)
      if (const auto* r = program->find_rule(id)) {
        std::string label = format_rule(*r);
        std::string esc;
        for (char ch : label) {
          if (ch == '"' || ch == '\\') esc += '\\';
          esc += ch;
        }
        out += " [label=\"r" + std::to_string(id) + ": " + esc + "\"]";
      }
    out += ";\n";
  }
  for (const auto& e : graph.edges) {
    out += "  r" + std::to_string(e.src) + " -> r" + std::to_string(e.dst);
    if (e.negative) out += " [style=dashed,label=\"not\"]";
    out += ";\n";
  }
  return out + "}\n";
}

}  // namespace deopt
