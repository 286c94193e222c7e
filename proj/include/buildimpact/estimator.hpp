#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "buildimpact/graph.hpp"
#include "buildimpact/history.hpp"
#include "buildimpact/time_model.hpp"

namespace buildimpact {

/// Outcome of one of the two delay estimators.
struct ChainImpact {
  bool impacts = false;
  DependencyChain lcp_new;  // empty unless impacts
  Millis delta = 0;

  friend bool operator==(const ChainImpact&, const ChainImpact&) = default;
};

/// New edge whose dependent is lcp[i]. `upstream` is the heaviest chain
/// s_0..s_j ending at the new dependency s_j.
///
/// The LCP target now waits for s_j. It is delayed when the s chain takes
/// longer than everything before lcp[i]:
///   Time(s_0..s_j) > Time(t_0..t_{i-1})  =>  delta = the difference,
///   lcp_new = (s_0..s_j, t_i..t_n).
/// With i = 0 the prefix is empty, so any positive s chain delays the build.
ChainImpact estimate_outward(const DependencyChain& lcp, std::size_t i,
                             const DependencyChain& upstream,
                             const TimeModel& tm);

/// New edge whose dependency is lcp[i] and whose dependent is s_j.
/// `upstream` is s_0..s_j and `downstream` is s_j..s_m.
///
/// No delay when s_j's own chain already reaches it no earlier than lcp[i]
/// finishes (Time(s_0..s_j) >= Time(t_0..t_i)), nor when the tail hanging
/// off s_j is no longer than the LCP remainder
/// (Time(s_j..s_m) <= Time(t_{i+1}..t_n)). Otherwise
/// delta = Time(s_j..s_m) - Time(t_{i+1}..t_n) and
/// lcp_new = (t_0..t_i, s_j..s_m).
ChainImpact estimate_inward(const DependencyChain& lcp, std::size_t i,
                            const DependencyChain& upstream,
                            const DependencyChain& downstream,
                            const TimeModel& tm);

struct AffectedFraction {
  double value = 1.0;
  TargetId gating_target;
  std::optional<std::string> note;  // set when b was substituted
};

/// Share of future builds expected to pay the delay: b of the edge's
/// dependency endpoint (s_j for outward, t_i for inward). Targets the cache
/// model does not know count as always built.
AffectedFraction affected_fraction(const CacheModel& cm,
                                   const EdgeClassification& classification,
                                   const DependencyEdge& edge);

struct ImpactEstimate {
  DependencyEdge edge;
  EdgeClassification classification;
  bool impacts_lcp = false;
  DependencyChain lcp_old;
  std::optional<DependencyChain> lcp_new;
  Millis delta = 0;
  double affected_fraction = 0;
  TargetId gating_target;
  std::vector<std::string> notes;

  friend bool operator==(const ImpactEstimate&,
                         const ImpactEstimate&) = default;
};

/// One estimate per (added edge, touched LCP) pair, each edge judged alone
/// against `prev`. Chains are extracted from `curr` with the edge under
/// evaluation removed. Removed edges produce nothing. Output is sorted by
/// (edge, lcp, kind).
std::vector<ImpactEstimate> estimate_change(
    const DependencyGraph& prev, const DependencyGraph& curr,
    const TimeModel& tm, const CacheModel& cm,
    std::span<const DependencyChain> lcps);

bool any_impact(std::span<const ImpactEstimate> estimates);

/// One line per estimate: edge, kind, verdict, delta in ms, affected %.
std::string format_estimates(std::span<const ImpactEstimate> estimates);

}  // namespace buildimpact
