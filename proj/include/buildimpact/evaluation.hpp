#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "buildimpact/estimator.hpp"
#include "buildimpact/history.hpp"

namespace buildimpact {

struct CurrentBuildCheck {
  bool match = false;
  bool vacuous = false;  // the estimate predicted no impact
};

/// Does the build right after the change realize the predicted LCP?
CurrentBuildCheck current_build_check(const ImpactEstimate& e,
                                      const BuildRecord& r,
                                      const DependencyGraph& g);

struct MannWhitneyResult {
  double u = 0;  // U statistic of the first sample
  double p_value = 1;
  bool exact = false;
};

/// Two-sided Mann-Whitney U test. Exact null distribution for small
/// tie-free samples, normal approximation with tie and continuity
/// correction otherwise.
MannWhitneyResult mann_whitney_u(std::span<const double> x,
                                 std::span<const double> y);

struct PastFutureResult {
  double p_value = 1;
  Millis observed_delta = 0;  // median(future) - median(past)
  double observed_affected_fraction = 0;
  std::vector<Millis> past_sample;
  std::vector<Millis> future_sample;
  std::size_t past_period = 0;
  std::size_t future_period = 0;
  /// Builds whose LCP ends where the expected one does but differs elsewhere.
  std::size_t past_near_miss = 0;
  std::size_t future_near_miss = 0;

  friend bool operator==(const PastFutureResult&,
                         const PastFutureResult&) = default;
};

inline constexpr std::size_t kMinQualifyingBuilds = 5;
inline constexpr std::size_t kDefaultPeriodBuilds = 50;

/// Compares builds realizing lcp_old in the period before `build_id` with
/// builds realizing lcp_new from `build_id` on. Both periods hold the same
/// number of builds, at most `period_builds`. Throws
/// InsufficientSampleError with fewer than five qualifying builds a side.
PastFutureResult past_future_check(
    const History& h, std::string_view build_id, const ImpactEstimate& e,
    std::size_t period_builds = kDefaultPeriodBuilds);

struct EvalOutcome {
  std::string build_id;
  ImpactEstimate estimate;
  bool current_lcp_match = false;
  bool current_check_vacuous = false;
  std::optional<PastFutureResult> past_future;
  std::string note;  // why past_future is absent

  friend bool operator==(const EvalOutcome&, const EvalOutcome&) = default;
};

struct ReplayConfig {
  std::size_t top_k = 5;
  std::chrono::milliseconds window = std::chrono::days{90};
  Statistic stat = Statistic::Median;
  std::size_t period_builds = kDefaultPeriodBuilds;
};

struct ReplaySkip {
  std::string build_id;
  std::string reason;
};

struct ReplayResult {
  std::vector<EvalOutcome> outcomes;
  std::vector<ReplaySkip> skipped;
};

/// Models available when build `index` is submitted: trained on earlier
/// builds inside the trailing window only.
struct ReplayModels {
  TimeModel time;
  CacheModel cache;
  std::vector<DependencyChain> lcps;
};

ReplayModels models_before(const History& h, std::size_t index,
                           const ReplayConfig& cfg);

/// Estimates every graph change in the history as if at submission time and
/// checks each estimate against what happened afterwards.
ReplayResult replay(const History& h, const ReplayConfig& cfg);

struct TuningGrid {
  std::vector<std::size_t> top_k;
  std::vector<std::chrono::milliseconds> windows;
  std::vector<Statistic> stats;
};

struct TuningRow {
  std::size_t top_k = 0;
  std::chrono::milliseconds window{};
  Statistic stat = Statistic::Median;
  std::size_t outcomes = 0;
  std::optional<double> match_rate;      // higher is better
  std::optional<double> delta_error;     // mean relative |obs - pred| / pred
  std::optional<double> fraction_error;  // mean |obs - pred| affected fraction

  friend bool operator==(const TuningRow&, const TuningRow&) = default;
};

/// Replays the history for every grid tuple and ranks them by match rate
/// (desc), then delta error (asc), then fraction error (asc). Missing scores
/// rank last; grid order breaks remaining ties.
std::vector<TuningRow> tune_parameters(
    const History& h, const TuningGrid& grid,
    std::size_t period_builds = kDefaultPeriodBuilds);

std::string format_tuning_table(std::span<const TuningRow> rows);
std::string format_outcomes(std::span<const EvalOutcome> outcomes);

}  // namespace buildimpact
