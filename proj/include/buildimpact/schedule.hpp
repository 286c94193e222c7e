#pragma once

#include <span>
#include <vector>

#include "buildimpact/graph.hpp"

namespace buildimpact {

/// Finish times of a build under unbounded parallelism.
struct Schedule {
  std::vector<Millis> finish;  // indexed like the graph
  Millis makespan = 0;
  DependencyChain critical_path;
};

/// Every target starts the instant its last prerequisite finishes and runs
/// for cost[i]. The critical path ends at the latest-finishing target and
/// backtracks through the latest-finishing prerequisite, preferring the
/// smaller name on ties. Cached targets of zero cost are dropped from the
/// path, so a partial build reports only the targets that ran.
Schedule schedule_build(const DependencyGraph& g, std::span<const Millis> cost,
                        const std::vector<bool>& executed);

}  // namespace buildimpact
