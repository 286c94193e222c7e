#include "buildimpact/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "buildimpact/error.hpp"
#include "buildimpact/schedule.hpp"

namespace buildimpact {

SimResult simulate_build(const DependencyGraph& g, const SimConfig& cfg,
                         const std::set<TargetId>& dirty) {
  if (!(cfg.cache_cost >= 0)) throw PreconditionError("negative cache cost");
  SimResult out;
  out.executed = dirty_closure(g, dirty);

  std::vector<Millis> cost(g.size(), cfg.cache_cost);
  std::vector<bool> executed(g.size(), false);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!out.executed.count(g.name(i))) continue;
    const auto it = cfg.durations.find(g.name(i));
    if (it == cfg.durations.end()) {
      throw UnknownTargetError(g.name(i), "simulation durations");
    }
    cost[i] = it->second;
    executed[i] = true;
  }

  Schedule s = schedule_build(g, cost, executed);
  out.makespan = s.makespan;
  out.critical_path = std::move(s.critical_path);
  for (std::size_t i = 0; i < g.size(); ++i) {
    out.finish_times.emplace(g.name(i), s.finish[i]);
  }
  return out;
}

double ChangeModel::probability(const TargetId& target) const {
  const auto it = dirty_probability.find(target);
  const double q = it == dirty_probability.end() ? default_probability
                                                 : it->second;
  if (!(q >= 0 && q <= 1)) {
    throw PreconditionError("dirty probability out of [0,1] for '" + target +
                            "'");
  }
  return q;
}

std::set<TargetId> ChangeModel::sample(const DependencyGraph& g,
                                       std::mt19937_64& rng) const {
  std::set<TargetId> dirty;
  if (independent) {
    for (const auto& t : g.targets()) {
      if (unit_uniform(rng) < probability(t)) dirty.insert(t);
    }
    return dirty;
  }
  double total = 0;
  for (const auto& t : g.targets()) total += probability(t);
  if (total <= 0) return dirty;
  double pick = unit_uniform(rng) * total;
  for (const auto& t : g.targets()) {
    const double q = probability(t);
    if (q > 0 && pick < q) {
      dirty.insert(t);
      return dirty;
    }
    pick -= q;
  }
  // Rounding left `pick` just past the last weight.
  for (auto it = g.targets().rbegin(); it != g.targets().rend(); ++it) {
    if (probability(*it) > 0) {
      dirty.insert(*it);
      break;
    }
  }
  return dirty;
}

std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

MonteCarloResult monte_carlo_impact(const DependencyGraph& prev,
                                    const DependencyGraph& curr,
                                    const SimConfig& cfg,
                                    const ChangeModel& change, std::size_t n,
                                    std::uint64_t seed) {
  if (n == 0) throw PreconditionError("Monte Carlo needs at least one trial");
  for (const auto& t : prev.targets()) {
    if (!curr.contains(t)) {
      throw PreconditionError("target '" + t +
                              "' missing from the changed graph");
    }
  }

  MonteCarloResult out;
  out.per_trial.reserve(n);
  std::size_t affected = 0;
  Millis total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    auto rng = stream_rng(seed, i);
    MonteCarloTrial trial;
    trial.dirty = change.sample(curr, rng);
    std::set<TargetId> dirty_prev;
    for (const auto& t : trial.dirty) {
      if (prev.contains(t)) dirty_prev.insert(t);
    }
    trial.makespan_prev = simulate_build(prev, cfg, dirty_prev).makespan;
    trial.makespan_curr = simulate_build(curr, cfg, trial.dirty).makespan;
    trial.delta = trial.makespan_curr - trial.makespan_prev;
    if (trial.delta > 0) ++affected;
    total += trial.delta;
    out.per_trial.push_back(std::move(trial));
  }
  out.mean_delta = total / static_cast<double>(n);
  out.affected_fraction = static_cast<double>(affected) / static_cast<double>(n);
  return out;
}

namespace {

std::string numbered(const char* pattern, std::size_t n) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, n);
  return buf;
}

}  // namespace

History generate_history(const DependencyGraph& g,
                         const std::map<TargetId, Millis>& durations,
                         const ChangeModel& change, std::size_t n_builds,
                         std::uint64_t seed, const WorkloadOptions& options) {
  if (!(options.duration_jitter >= 0 && options.duration_jitter <= 1)) {
    throw PreconditionError("duration jitter must lie in [0,1]");
  }
  if (!(options.cache_cost >= 0)) throw PreconditionError("negative cache cost");
  auto changes = options.changes;
  std::stable_sort(changes.begin(), changes.end(),
                   [](const auto& a, const auto& b) {
                     return a.at_build < b.at_build;
                   });
  for (const auto& c : changes) {
    if (c.at_build < 1 || c.at_build > n_builds) {
      throw PreconditionError("scripted change outside the build range");
    }
  }

  std::map<std::string, DependencyGraph> graphs;
  std::vector<BuildRecord> records;
  DependencyGraph graph = g;
  std::string graph_ref = numbered("graph_%04zu.json", 1);
  graphs.emplace(graph_ref, graph);
  auto next_change = changes.begin();

  for (std::size_t b = 1; b <= n_builds; ++b) {
    bool changed = false;
    for (; next_change != changes.end() && next_change->at_build == b;
         ++next_change) {
      graph = graph.with_edges(next_change->added_edges);
      changed = true;
    }
    if (changed) {
      graph_ref = numbered("graph_%04zu.json", b);
      graphs.insert_or_assign(graph_ref, graph);
    }

    auto rng = stream_rng(seed, b);
    std::set<TargetId> dirty;
    if (b == 1 && options.initial_full_build) {
      dirty.insert(graph.targets().begin(), graph.targets().end());
    } else {
      dirty = change.sample(graph, rng);
    }
    const auto executed = dirty_closure(graph, dirty);

    BuildRecord r;
    r.build_id = numbered("b%04zu", b);
    r.timestamp = options.start +
                  options.interval * static_cast<std::int64_t>(b - 1);
    r.graph_ref = graph_ref;
    for (const auto& t : graph.targets()) {
      TargetExecution e{t, options.cache_cost, true};
      if (executed.count(t)) {
        const auto it = durations.find(t);
        if (it == durations.end()) throw UnknownTargetError(t, "workload durations");
        const double noise =
            options.duration_jitter * (2.0 * unit_uniform(rng) - 1.0);
        e.duration = std::max(0.0, std::round(it->second * (1.0 + noise)));
        e.cached = false;
      }
      r.executions.push_back(std::move(e));
    }
    records.push_back(std::move(r));
  }
  return History(std::move(records), std::move(graphs));
}

Workload generate_workload(const WorkloadShape& shape,
                           const ChangeModel& change, std::size_t n_builds,
                           std::uint64_t seed, const WorkloadOptions& options) {
  if (shape.n_targets == 0) throw PreconditionError("workload needs targets");
  if (!(shape.edge_density >= 0 && shape.edge_density <= 1)) {
    throw PreconditionError("edge density must lie in [0,1]");
  }
  if (!(shape.min_duration >= 0 && shape.min_duration <= shape.max_duration)) {
    throw PreconditionError("invalid duration range");
  }

  std::size_t width = 2;
  for (std::size_t n = shape.n_targets - 1; n >= 100; n /= 10) ++width;
  std::vector<TargetId> names;
  for (std::size_t i = 0; i < shape.n_targets; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "t%0*zu", static_cast<int>(width), i);
    names.emplace_back(buf);
  }

  auto rng = stream_rng(seed, 0);
  std::vector<DependencyEdge> edges;
  for (std::size_t i = 0; i < names.size(); ++i) {
    for (std::size_t j = i + 1; j < names.size(); ++j) {
      if (unit_uniform(rng) < shape.edge_density) {
        edges.push_back({names[i], names[j]});
      }
    }
  }
  Workload w;
  const double lo = std::ceil(shape.min_duration);
  const double span = std::floor(shape.max_duration) - lo + 1;
  for (const auto& t : names) {
    const double d = lo + std::floor(unit_uniform(rng) * std::max(span, 1.0));
    w.durations.emplace(t, std::min(d, std::max(lo, shape.max_duration)));
  }
  w.graph = DependencyGraph(names, std::move(edges));
  w.history =
      generate_history(w.graph, w.durations, change, n_builds, seed, options);
  return w;
}

}  // namespace buildimpact
