#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "buildimpact/types.hpp"

namespace buildimpact {

enum class Statistic { Median, Mean, P90 };

std::string to_string(Statistic stat);
/// Accepts "median", "mean" and "p90". Throws ParseError otherwise.
Statistic parse_statistic(std::string_view text);

/// Per-target duration estimate backing Time(...) over chains.
class TimeModel {
 public:
  TimeModel() = default;
  explicit TimeModel(std::map<TargetId, Millis> durations,
                     Statistic stat = Statistic::Median,
                     TimeWindow window = {});

  /// Throws UnknownTargetError for targets the model has no statistic for.
  Millis duration(std::string_view target) const;
  bool contains(std::string_view target) const;

  const std::map<TargetId, Millis, std::less<>>& durations() const noexcept {
    return durations_;
  }
  Statistic statistic() const noexcept { return stat_; }
  const TimeWindow& window() const noexcept { return window_; }

  TimeModel scaled(double factor) const;

  friend bool operator==(const TimeModel&, const TimeModel&) = default;

 private:
  std::map<TargetId, Millis, std::less<>> durations_;
  Statistic stat_ = Statistic::Median;
  TimeWindow window_{};
};

/// Sum of per-target statistics along the chain; the empty chain costs 0.
Millis time_of_chain(const TimeModel& tm, const DependencyChain& chain);
Millis time_of(const TimeModel& tm, std::span<const TargetId> targets);

/// Statistic over a non-empty sample. Median of an even-sized sample is the
/// mean of the two middle values; p90 interpolates linearly between ranks.
Millis summarize(std::span<const Millis> sample, Statistic stat);

}  // namespace buildimpact
