#include "buildimpact/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <tuple>

#include "buildimpact/error.hpp"

namespace buildimpact {

namespace {

void require_known(const TimeModel& tm, const DependencyChain& chain) {
  for (const auto& t : chain.targets) tm.duration(t);
}

}  // namespace

ChainImpact estimate_outward(const DependencyChain& lcp, std::size_t i,
                             const DependencyChain& upstream,
                             const TimeModel& tm) {
  if (i >= lcp.size()) throw PreconditionError("LCP index out of bounds");
  if (upstream.empty()) throw PreconditionError("empty upstream chain");
  require_known(tm, lcp);

  const Millis arrival = time_of_chain(tm, upstream);
  const Millis prefix = time_of_chain(tm, lcp.slice(0, i));
  if (arrival <= prefix) return {};
  return {true, concat(upstream, lcp.slice(i, lcp.size())), arrival - prefix};
}

ChainImpact estimate_inward(const DependencyChain& lcp, std::size_t i,
                            const DependencyChain& upstream,
                            const DependencyChain& downstream,
                            const TimeModel& tm) {
  if (i >= lcp.size()) throw PreconditionError("LCP index out of bounds");
  if (upstream.empty() || downstream.empty() ||
      upstream.back() != downstream.front()) {
    throw PreconditionError("upstream and downstream chains must meet at s_j");
  }
  require_known(tm, lcp);

  if (time_of_chain(tm, upstream) >= time_of_chain(tm, lcp.slice(0, i + 1))) {
    return {};
  }
  const Millis tail = time_of_chain(tm, downstream);
  const Millis rest = time_of_chain(tm, lcp.slice(i + 1, lcp.size()));
  if (tail <= rest) return {};
  return {true, concat(lcp.slice(0, i + 1), downstream), tail - rest};
}

AffectedFraction affected_fraction(const CacheModel& cm,
                                   const EdgeClassification& classification,
                                   const DependencyEdge& edge) {
  if (classification.kind == EdgeKind::Unrelated) {
    throw PreconditionError("affected fraction needs an outward or inward edge");
  }
  // Outward gates on s_j, inward on t_i: the dependency endpoint either way.
  AffectedFraction out;
  out.gating_target = edge.dependency;
  if (const auto b = cm.built_probability(edge.dependency)) {
    out.value = *b;
  } else {
    out.value = 1.0;
    out.note = "no build-probability data for '" + edge.dependency +
               "' in window; assumed always built";
  }
  return out;
}

std::vector<ImpactEstimate> estimate_change(
    const DependencyGraph& prev, const DependencyGraph& curr,
    const TimeModel& tm, const CacheModel& cm,
    std::span<const DependencyChain> lcps) {
  for (const auto& lcp : lcps) {
    if (lcp.empty() || !is_valid_chain(prev, lcp)) {
      throw PreconditionError("LCP " + to_string(lcp) +
                              " is not a chain of the previous graph");
    }
  }

  std::vector<ImpactEstimate> out;
  for (const auto& edge : graph_diff(prev, curr).added_edges) {
    const auto classifications = classify_edge(edge, lcps);
    const DependencyGraph masked = curr.without_edge(edge);
    for (const auto& cls : classifications) {
      ImpactEstimate est;
      est.edge = edge;
      est.classification = cls;
      est.gating_target = edge.dependency;
      if (cls.kind == EdgeKind::Unrelated) {
        est.notes.push_back("edge touches none of the top-k LCPs");
        out.push_back(std::move(est));
        continue;
      }
      est.lcp_old = *cls.lcp;
      const std::size_t i = *cls.lcp_index;

      ChainImpact impact;
      if (cls.kind == EdgeKind::Outward) {
        const auto up = upstream_chain(masked, tm, edge.dependency);
        impact = estimate_outward(est.lcp_old, i, up, tm);
      } else {
        const auto up = upstream_chain(masked, tm, edge.dependent);
        const auto down = downstream_chain(masked, tm, edge.dependent);
        impact = estimate_inward(est.lcp_old, i, up, down, tm);
      }
      est.impacts_lcp = impact.impacts;
      est.delta = impact.delta;
      if (impact.impacts) est.lcp_new = std::move(impact.lcp_new);

      const auto fraction = affected_fraction(cm, cls, edge);
      est.affected_fraction = fraction.value;
      if (fraction.note) est.notes.push_back(*fraction.note);
      out.push_back(std::move(est));
    }
  }

  std::stable_sort(out.begin(), out.end(),
                   [](const ImpactEstimate& a, const ImpactEstimate& b) {
                     return std::tie(a.edge, a.lcp_old, a.classification.kind) <
                            std::tie(b.edge, b.lcp_old, b.classification.kind);
                   });
  return out;
}

bool any_impact(std::span<const ImpactEstimate> estimates) {
  return std::any_of(estimates.begin(), estimates.end(),
                     [](const ImpactEstimate& e) { return e.impacts_lcp; });
}

namespace {

std::string format_ms(Millis ms) {
  char buf[64];
  if (std::floor(ms) == ms && std::fabs(ms) < 1e15) {
    std::snprintf(buf, sizeof buf, "%.0f", ms);
  } else {
    std::snprintf(buf, sizeof buf, "%.3f", ms);
  }
  return buf;
}

}  // namespace

std::string format_estimates(std::span<const ImpactEstimate> estimates) {
  if (estimates.empty()) return "no new dependencies\n";
  std::string out;
  for (const auto& e : estimates) {
    out += to_string(e.edge);
    out += "  ";
    out += to_string(e.classification.kind);
    if (e.classification.lcp) out += "  lcp=" + to_string(e.lcp_old);
    if (e.impacts_lcp) {
      char pct[32];
      std::snprintf(pct, sizeof pct, "%.1f%%", e.affected_fraction * 100.0);
      out += "  IMPACT  delta=" + format_ms(e.delta) + " ms  p=" + pct;
      out += "  new=" + to_string(*e.lcp_new);
    } else {
      out += "  no-impact  delta=0 ms";
    }
    out += '\n';
  }
  return out;
}

}  // namespace buildimpact
