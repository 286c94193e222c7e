#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "buildimpact/graph.hpp"
#include "buildimpact/history.hpp"

namespace buildimpact {

struct SimConfig {
  Millis cache_cost = 0;
  std::map<TargetId, Millis> durations;
};

struct SimResult {
  Millis makespan = 0;
  DependencyChain critical_path;
  std::set<TargetId> executed;
  std::map<TargetId, Millis> finish_times;

  friend bool operator==(const SimResult&, const SimResult&) = default;
};

/// Runs one build with unbounded workers: the dirty closure executes, every
/// other target costs `cache_cost`.
SimResult simulate_build(const DependencyGraph& g, const SimConfig& cfg,
                         const std::set<TargetId>& dirty);

/// Which targets a submission touches. Independent mode flips a coin per
/// target; single-change mode dirties exactly one target, drawn with weight
/// proportional to its probability.
struct ChangeModel {
  double default_probability = 0;
  std::map<TargetId, double> dirty_probability;
  bool independent = true;

  double probability(const TargetId& target) const;
  std::set<TargetId> sample(const DependencyGraph& g,
                            std::mt19937_64& rng) const;
};

/// Generator for draw `index` of stream `seed`; depends on nothing else.
std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t index);
/// Uniform in [0, 1) from the top 53 bits of one draw.
double unit_uniform(std::mt19937_64& rng);

struct MonteCarloTrial {
  std::set<TargetId> dirty;
  Millis makespan_prev = 0;
  Millis makespan_curr = 0;
  Millis delta = 0;
};

struct MonteCarloResult {
  Millis mean_delta = 0;
  double affected_fraction = 0;  // trials with delta > 0
  std::vector<MonteCarloTrial> per_trial;
};

/// Samples dirty sets over `curr`'s targets and simulates both graphs.
/// Trial i draws from stream_rng(seed, i), so the result is independent of
/// how trials are scheduled.
MonteCarloResult monte_carlo_impact(const DependencyGraph& prev,
                                    const DependencyGraph& curr,
                                    const SimConfig& cfg,
                                    const ChangeModel& change, std::size_t n,
                                    std::uint64_t seed);

struct WorkloadShape {
  std::size_t n_targets = 10;
  double edge_density = 0.2;
  Millis min_duration = 1;
  Millis max_duration = 100;
};

/// Edges added just before build `at_build` (1-based) runs.
struct ScriptedChange {
  std::size_t at_build = 0;
  std::vector<DependencyEdge> added_edges;
};

struct WorkloadOptions {
  Millis cache_cost = 0;
  /// Per-build multiplicative noise: duration * (1 + jitter * u), u in [-1, 1).
  double duration_jitter = 0;
  /// First build rebuilds everything, seeding every target's time samples.
  bool initial_full_build = true;
  Timestamp start = Timestamp{std::chrono::sys_days{
      std::chrono::year{2026} / std::chrono::January / 1}};
  std::chrono::milliseconds interval = std::chrono::hours{1};
  std::vector<ScriptedChange> changes;
};

struct Workload {
  DependencyGraph graph;  // graph of the first build
  std::map<TargetId, Millis> durations;
  History history;
};

/// Build logs for `g` produced by sampling dirty sets and simulating them.
/// Graph snapshots are named graph_NNNN.json after the first build using
/// them. Deterministic given `seed`.
History generate_history(const DependencyGraph& g,
                         const std::map<TargetId, Millis>& durations,
                         const ChangeModel& change, std::size_t n_builds,
                         std::uint64_t seed, const WorkloadOptions& options);

/// Random DAG (edge i -> j with probability edge_density for i < j in name
/// order, targets t00, t01, ...) with integer durations drawn uniformly from
/// the shape's range, plus a generated history.
Workload generate_workload(const WorkloadShape& shape,
                           const ChangeModel& change, std::size_t n_builds,
                           std::uint64_t seed,
                           const WorkloadOptions& options = {});

}  // namespace buildimpact
