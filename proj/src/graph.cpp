#include "buildimpact/graph.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <queue>

#include "buildimpact/error.hpp"
#include "buildimpact/json_io.hpp"

namespace buildimpact {

namespace {

/// Finds one cycle among targets Kahn's algorithm could not order.
std::vector<std::string> find_cycle(
    const std::vector<TargetId>& names,
    const std::vector<std::vector<std::size_t>>& dependents) {
  enum class Color { White, Gray, Black };
  std::vector<Color> color(names.size(), Color::White);
  std::vector<std::size_t> stack;

  std::function<std::optional<std::vector<std::size_t>>(std::size_t)> visit =
      [&](std::size_t v) -> std::optional<std::vector<std::size_t>> {
    color[v] = Color::Gray;
    stack.push_back(v);
    for (const std::size_t w : dependents[v]) {
      if (color[w] == Color::Gray) {
        const auto at = std::find(stack.begin(), stack.end(), w);
        return std::vector<std::size_t>(at, stack.end());
      }
      if (color[w] == Color::White) {
        if (auto found = visit(w)) return found;
      }
    }
    stack.pop_back();
    color[v] = Color::Black;
    return std::nullopt;
  };

  for (std::size_t v = 0; v < names.size(); ++v) {
    if (color[v] != Color::White) continue;
    if (auto cycle = visit(v)) {
      const auto smallest = std::min_element(cycle->begin(), cycle->end());
      std::rotate(cycle->begin(), smallest, cycle->end());
      std::vector<std::string> witness;
      for (const std::size_t i : *cycle) witness.push_back(names[i]);
      return witness;
    }
  }
  return {};
}

}  // namespace

DependencyGraph::DependencyGraph(std::vector<TargetId> targets,
                                 std::vector<DependencyEdge> edges) {
  std::sort(targets.begin(), targets.end());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i].empty()) throw ParseError("empty target name");
    if (i > 0 && targets[i] == targets[i - 1]) {
      throw ParseError("duplicate target '" + targets[i] + "'");
    }
  }
  names_ = std::move(targets);
  for (std::size_t i = 0; i < names_.size(); ++i) index_.emplace(names_[i], i);

  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  for (const auto& e : edges) {
    if (e.dependency == e.dependent) throw SelfLoopError(e.dependency);
    if (!contains(e.dependency)) throw DanglingEndpointError(e.dependency);
    if (!contains(e.dependent)) throw DanglingEndpointError(e.dependent);
  }
  edges_ = std::move(edges);

  prerequisites_.assign(names_.size(), {});
  dependents_.assign(names_.size(), {});
  for (const auto& e : edges_) {
    const std::size_t from = index_.find(e.dependency)->second;
    const std::size_t to = index_.find(e.dependent)->second;
    dependents_[from].push_back(to);
    prerequisites_[to].push_back(from);
  }
  for (auto& list : dependents_) std::sort(list.begin(), list.end());
  for (auto& list : prerequisites_) std::sort(list.begin(), list.end());

  std::vector<std::size_t> indegree(names_.size());
  std::priority_queue<std::size_t, std::vector<std::size_t>,
                      std::greater<std::size_t>>
      ready;
  for (std::size_t v = 0; v < names_.size(); ++v) {
    indegree[v] = prerequisites_[v].size();
    if (indegree[v] == 0) ready.push(v);
  }
  topo_.reserve(names_.size());
  while (!ready.empty()) {
    const std::size_t v = ready.top();
    ready.pop();
    topo_.push_back(v);
    for (const std::size_t w : dependents_[v]) {
      if (--indegree[w] == 0) ready.push(w);
    }
  }
  if (topo_.size() != names_.size()) {
    throw CycleError(find_cycle(names_, dependents_));
  }
}

bool DependencyGraph::contains(std::string_view target) const {
  return index_.find(target) != index_.end();
}

std::optional<std::size_t> DependencyGraph::find(
    std::string_view target) const {
  const auto it = index_.find(target);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t DependencyGraph::index_of(std::string_view target) const {
  const auto it = index_.find(target);
  if (it == index_.end()) {
    throw UnknownTargetError(std::string(target), "dependency graph");
  }
  return it->second;
}

bool DependencyGraph::has_edge(const DependencyEdge& edge) const {
  return std::binary_search(edges_.begin(), edges_.end(), edge);
}

DependencyGraph DependencyGraph::without_edge(
    const DependencyEdge& edge) const {
  std::vector<DependencyEdge> kept;
  kept.reserve(edges_.size());
  for (const auto& e : edges_) {
    if (e != edge) kept.push_back(e);
  }
  return DependencyGraph(names_, std::move(kept));
}

DependencyGraph DependencyGraph::with_edges(
    std::span<const DependencyEdge> extra) const {
  std::vector<DependencyEdge> all = edges_;
  all.insert(all.end(), extra.begin(), extra.end());
  return DependencyGraph(names_, std::move(all));
}

DependencyGraph load_graph(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("graph file: ") + e.what());
  }
  return graph_from_json(doc);
}

DependencyGraph load_graph_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open graph file " + path.string());
  try {
    return load_graph(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_graph(std::ostream& out, const DependencyGraph& g) {
  out << graph_to_json(g).dump(2) << '\n';
}

bool is_valid_chain(const DependencyGraph& g, const DependencyChain& chain) {
  std::set<std::string_view> seen;
  for (std::size_t i = 0; i < chain.targets.size(); ++i) {
    if (!g.contains(chain.targets[i])) return false;
    if (!seen.insert(chain.targets[i]).second) return false;
    if (i > 0 &&
        !g.has_edge(DependencyEdge{chain.targets[i - 1], chain.targets[i]})) {
      return false;
    }
  }
  return true;
}

std::set<TargetId> dirty_closure(const DependencyGraph& g,
                                 const std::set<TargetId>& changed) {
  std::vector<bool> dirty(g.size(), false);
  std::deque<std::size_t> queue;
  for (const auto& t : changed) {
    const std::size_t i = g.index_of(t);
    if (!dirty[i]) {
      dirty[i] = true;
      queue.push_back(i);
    }
  }
  while (!queue.empty()) {
    const std::size_t v = queue.front();
    queue.pop_front();
    for (const std::size_t w : g.dependents(v)) {
      if (!dirty[w]) {
        dirty[w] = true;
        queue.push_back(w);
      }
    }
  }
  std::set<TargetId> out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (dirty[i]) out.insert(g.name(i));
  }
  return out;
}

GraphDiff graph_diff(const DependencyGraph& prev, const DependencyGraph& curr) {
  GraphDiff diff;
  const auto& pt = prev.targets();
  const auto& ct = curr.targets();
  std::set_difference(ct.begin(), ct.end(), pt.begin(), pt.end(),
                      std::back_inserter(diff.added_targets));
  std::set_difference(pt.begin(), pt.end(), ct.begin(), ct.end(),
                      std::back_inserter(diff.removed_targets));
  const auto& pe = prev.edges();
  const auto& ce = curr.edges();
  std::set_difference(ce.begin(), ce.end(), pe.begin(), pe.end(),
                      std::back_inserter(diff.added_edges));
  std::set_difference(pe.begin(), pe.end(), ce.begin(), ce.end(),
                      std::back_inserter(diff.removed_edges));
  return diff;
}

DependencyGraph apply_diff(const DependencyGraph& g, const GraphDiff& diff) {
  std::vector<TargetId> targets;
  const std::set<TargetId> removed_targets(diff.removed_targets.begin(),
                                           diff.removed_targets.end());
  for (const auto& t : g.targets()) {
    if (!removed_targets.count(t)) targets.push_back(t);
  }
  targets.insert(targets.end(), diff.added_targets.begin(),
                 diff.added_targets.end());

  std::vector<DependencyEdge> edges;
  const std::set<DependencyEdge> removed_edges(diff.removed_edges.begin(),
                                               diff.removed_edges.end());
  for (const auto& e : g.edges()) {
    if (!removed_edges.count(e)) edges.push_back(e);
  }
  edges.insert(edges.end(), diff.added_edges.begin(), diff.added_edges.end());
  return DependencyGraph(std::move(targets), std::move(edges));
}

std::string to_string(EdgeKind kind) {
  switch (kind) {
    case EdgeKind::Outward:
      return "outward";
    case EdgeKind::Inward:
      return "inward";
    case EdgeKind::Unrelated:
      return "unrelated";
  }
  return "unrelated";
}

EdgeKind parse_edge_kind(std::string_view text) {
  if (text == "outward") return EdgeKind::Outward;
  if (text == "inward") return EdgeKind::Inward;
  if (text == "unrelated") return EdgeKind::Unrelated;
  throw ParseError("unknown edge kind '" + std::string(text) + "'");
}

std::vector<EdgeClassification> classify_edge(
    const DependencyEdge& edge, std::span<const DependencyChain> lcps) {
  std::vector<EdgeClassification> out;
  for (const auto& lcp : lcps) {
    const std::size_t dependent_at = lcp.position(edge.dependent);
    if (dependent_at < lcp.size()) {
      out.push_back({EdgeKind::Outward, lcp, dependent_at});
    }
    const std::size_t dependency_at = lcp.position(edge.dependency);
    if (dependency_at < lcp.size()) {
      out.push_back({EdgeKind::Inward, lcp, dependency_at});
    }
  }
  if (out.empty()) out.push_back({EdgeKind::Unrelated, {}, {}});
  return out;
}

namespace {

enum class Direction { Up, Down };

DependencyChain heaviest_chain(const DependencyGraph& g, const TimeModel& tm,
                               std::string_view node, Direction dir) {
  const std::size_t start = g.index_of(node);
  const auto next = [&](std::size_t v) {
    return dir == Direction::Up ? g.prerequisites(v) : g.dependents(v);
  };

  // Reach set: ancestors (Up) or descendants (Down) of the start node.
  std::vector<bool> reach(g.size(), false);
  std::deque<std::size_t> queue{start};
  reach[start] = true;
  while (!queue.empty()) {
    const std::size_t v = queue.front();
    queue.pop_front();
    for (const std::size_t w : next(v)) {
      if (!reach[w]) {
        reach[w] = true;
        queue.push_back(w);
      }
    }
  }

  // best[v]: heaviest path from v away from the start node, v inclusive.
  std::vector<Millis> best(g.size(), 0);
  auto order = g.topological_order();
  const auto relax = [&](std::size_t v) {
    Millis tail = 0;
    for (const std::size_t w : next(v)) tail = std::max(tail, best[w]);
    best[v] = tm.duration(g.name(v)) + tail;
  };
  if (dir == Direction::Up) {
    for (const std::size_t v : order) {
      if (reach[v]) relax(v);
    }
  } else {
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      if (reach[*it]) relax(*it);
    }
  }

  DependencyChain chain;
  std::size_t v = start;
  chain.targets.push_back(g.name(v));
  while (!next(v).empty()) {
    std::size_t pick = next(v).front();
    for (const std::size_t w : next(v)) {
      if (best[w] > best[pick]) pick = w;
    }
    v = pick;
    chain.targets.push_back(g.name(v));
  }
  if (dir == Direction::Up) {
    std::reverse(chain.targets.begin(), chain.targets.end());
  }
  return chain;
}

}  // namespace

DependencyChain upstream_chain(const DependencyGraph& g, const TimeModel& tm,
                               std::string_view node) {
  return heaviest_chain(g, tm, node, Direction::Up);
}

DependencyChain downstream_chain(const DependencyGraph& g, const TimeModel& tm,
                                 std::string_view node) {
  return heaviest_chain(g, tm, node, Direction::Down);
}

}  // namespace buildimpact
