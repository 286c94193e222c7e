#include "buildimpact/schedule.hpp"

#include <algorithm>

#include "buildimpact/error.hpp"

namespace buildimpact {

Schedule schedule_build(const DependencyGraph& g, std::span<const Millis> cost,
                        const std::vector<bool>& executed) {
  if (cost.size() != g.size() || executed.size() != g.size()) {
    throw PreconditionError("schedule inputs do not cover the graph");
  }
  Schedule s;
  s.finish.assign(g.size(), 0);
  for (const std::size_t v : g.topological_order()) {
    Millis start = 0;
    for (const std::size_t p : g.prerequisites(v)) {
      start = std::max(start, s.finish[p]);
    }
    s.finish[v] = start + cost[v];
  }
  if (g.size() == 0) return s;

  std::size_t end = 0;
  for (std::size_t v = 1; v < g.size(); ++v) {
    if (s.finish[v] > s.finish[end]) end = v;
  }
  s.makespan = s.finish[end];

  std::vector<std::size_t> path{end};
  for (std::size_t v = end; !g.prerequisites(v).empty();) {
    std::size_t pick = g.prerequisites(v).front();
    for (const std::size_t p : g.prerequisites(v)) {
      if (s.finish[p] > s.finish[pick]) pick = p;
    }
    v = pick;
    path.push_back(v);
  }
  std::reverse(path.begin(), path.end());
  for (const std::size_t v : path) {
    if (!executed[v] && cost[v] == 0) continue;
    s.critical_path.targets.push_back(g.name(v));
  }
  return s;
}

}  // namespace buildimpact
