#pragma once

// Test-only fixtures and brute-force oracles. Nothing here calls into the
// library's algorithms beyond constructing graphs.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "buildimpact/graph.hpp"
#include "buildimpact/history.hpp"

namespace oracle {

using buildimpact::DependencyChain;
using buildimpact::DependencyEdge;
using buildimpact::DependencyGraph;
using buildimpact::Millis;
using buildimpact::TargetId;

/// The seven-target example graph: t0 feeds t1, t2, t3; t2 -> t4 -> t6;
/// t3 -> t5.
inline DependencyGraph g1() {
  return DependencyGraph({"t0", "t1", "t2", "t3", "t4", "t5", "t6"},
                         {{"t0", "t1"},
                          {"t0", "t2"},
                          {"t0", "t3"},
                          {"t2", "t4"},
                          {"t4", "t6"},
                          {"t3", "t5"}});
}

inline std::map<TargetId, Millis> unit_durations(const DependencyGraph& g) {
  std::map<TargetId, Millis> out;
  for (const auto& t : g.targets()) out.emplace(t, 1.0);
  return out;
}

inline std::set<TargetId> all_targets(const DependencyGraph& g) {
  return {g.targets().begin(), g.targets().end()};
}

/// Every path in the DAG, as target-name lists, found by DFS from every node.
inline std::vector<std::vector<TargetId>> all_paths(const DependencyGraph& g) {
  std::map<TargetId, std::vector<TargetId>> next;
  for (const auto& e : g.edges()) next[e.dependency].push_back(e.dependent);
  std::vector<std::vector<TargetId>> out;
  std::vector<TargetId> path;
  std::function<void(const TargetId&)> walk = [&](const TargetId& v) {
    path.push_back(v);
    out.push_back(path);
    for (const auto& w : next[v]) walk(w);
    path.pop_back();
  };
  for (const auto& t : g.targets()) walk(t);
  return out;
}

inline bool is_source(const DependencyGraph& g, const TargetId& t) {
  return std::none_of(g.edges().begin(), g.edges().end(),
                      [&](const DependencyEdge& e) { return e.dependent == t; });
}

inline bool is_sink(const DependencyGraph& g, const TargetId& t) {
  return std::none_of(g.edges().begin(), g.edges().end(), [&](const DependencyEdge& e) {
    return e.dependency == t;
  });
}

inline Millis path_cost(const std::vector<TargetId>& path,
                        const std::map<TargetId, Millis>& cost) {
  Millis total = 0;
  for (const auto& t : path) total += cost.at(t);
  return total;
}

/// Fixpoint over edges: keep adding dependents of dirty targets.
inline std::set<TargetId> closure_fixpoint(const DependencyGraph& g,
                                           std::set<TargetId> dirty) {
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto& e : g.edges()) {
      if (dirty.count(e.dependency) && dirty.insert(e.dependent).second) {
        grew = true;
      }
    }
  }
  return dirty;
}

/// Makespan as the heaviest path under effective costs (executed targets
/// cost their duration, the rest `cache_cost`).
inline Millis makespan_by_paths(const DependencyGraph& g,
                                const std::map<TargetId, Millis>& durations,
                                const std::set<TargetId>& executed,
                                Millis cache_cost) {
  std::map<TargetId, Millis> cost;
  for (const auto& t : g.targets()) {
    cost[t] = executed.count(t) ? durations.at(t) : cache_cost;
  }
  Millis best = 0;
  for (const auto& p : all_paths(g)) best = std::max(best, path_cost(p, cost));
  return best;
}

struct RandomGraph {
  DependencyGraph graph;
  std::map<TargetId, Millis> durations;
};

/// Random DAG over shuffled single-letter-plus-number names so that name
/// order and topological order disagree.
inline RandomGraph random_dag(std::mt19937_64& rng, std::size_t max_nodes,
                              double density, int max_duration = 20) {
  std::uniform_int_distribution<std::size_t> size_dist(1, max_nodes);
  const std::size_t n = size_dist(rng);
  std::vector<TargetId> names;
  for (std::size_t i = 0; i < n; ++i) {
    names.push_back(std::string(1, static_cast<char>('a' + (i * 7) % 26)) +
                    std::to_string(i));
  }
  std::shuffle(names.begin(), names.end(), rng);
  std::bernoulli_distribution edge(density);
  std::vector<DependencyEdge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (edge(rng)) edges.push_back({names[i], names[j]});
    }
  }
  std::uniform_int_distribution<int> dur(0, max_duration);
  RandomGraph out{DependencyGraph(names, edges), {}};
  for (const auto& t : names) out.durations[t] = dur(rng);
  return out;
}

inline std::set<TargetId> random_subset(std::mt19937_64& rng,
                                        const DependencyGraph& g, double p) {
  std::bernoulli_distribution pick(p);
  std::set<TargetId> out;
  for (const auto& t : g.targets()) {
    if (pick(rng)) out.insert(t);
  }
  return out;
}

/// Record of a build over `g` executing exactly `executed`.
inline buildimpact::BuildRecord make_record(
    const std::string& id, buildimpact::Timestamp ts, const std::string& ref,
    const DependencyGraph& g, const std::map<TargetId, Millis>& durations,
    const std::set<TargetId>& executed, Millis cache_cost = 0) {
  buildimpact::BuildRecord r{id, ts, ref, {}};
  for (const auto& t : g.targets()) {
    const bool ran = executed.count(t) > 0;
    r.executions.push_back({t, ran ? durations.at(t) : cache_cost, !ran});
  }
  return r;
}

inline buildimpact::Timestamp hour(int h) {
  using namespace std::chrono;
  return buildimpact::Timestamp{sys_days{year{2026} / January / 1}} + hours{h};
}

}  // namespace oracle
