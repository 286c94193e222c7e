#include "buildimpact/time_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "buildimpact/error.hpp"

namespace buildimpact {

std::string to_string(Statistic stat) {
  switch (stat) {
    case Statistic::Median:
      return "median";
    case Statistic::Mean:
      return "mean";
    case Statistic::P90:
      return "p90";
  }
  return "median";
}

Statistic parse_statistic(std::string_view text) {
  if (text == "median") return Statistic::Median;
  if (text == "mean") return Statistic::Mean;
  if (text == "p90") return Statistic::P90;
  throw ParseError("unknown statistic '" + std::string(text) + "'");
}

TimeModel::TimeModel(std::map<TargetId, Millis> durations, Statistic stat,
                     TimeWindow window)
    : durations_(durations.begin(), durations.end()),
      stat_(stat),
      window_(window) {
  for (const auto& [target, ms] : durations_) {
    if (!(ms >= 0)) {
      throw PreconditionError("negative duration for target '" + target + "'");
    }
  }
}

Millis TimeModel::duration(std::string_view target) const {
  const auto it = durations_.find(target);
  if (it == durations_.end()) {
    throw UnknownTargetError(std::string(target), "time model");
  }
  return it->second;
}

bool TimeModel::contains(std::string_view target) const {
  return durations_.find(target) != durations_.end();
}

TimeModel TimeModel::scaled(double factor) const {
  std::map<TargetId, Millis> out;
  for (const auto& [target, ms] : durations_) out.emplace(target, ms * factor);
  return TimeModel(std::move(out), stat_, window_);
}

Millis time_of(const TimeModel& tm, std::span<const TargetId> targets) {
  Millis total = 0;
  for (const auto& t : targets) total += tm.duration(t);
  return total;
}

Millis time_of_chain(const TimeModel& tm, const DependencyChain& chain) {
  return time_of(tm, chain.targets);
}

Millis summarize(std::span<const Millis> sample, Statistic stat) {
  if (sample.empty()) throw PreconditionError("statistic of empty sample");
  std::vector<Millis> v(sample.begin(), sample.end());
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  switch (stat) {
    case Statistic::Mean:
      return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(n);
    case Statistic::Median:
      return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
    case Statistic::P90: {
      const double rank = 0.9 * static_cast<double>(n - 1);
      const auto lo = static_cast<std::size_t>(std::floor(rank));
      const std::size_t hi = std::min(lo + 1, n - 1);
      const double frac = rank - static_cast<double>(lo);
      return v[lo] + (v[hi] - v[lo]) * frac;
    }
  }
  return v[n / 2];
}

}  // namespace buildimpact
