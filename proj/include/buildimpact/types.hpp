#pragma once

#include <chrono>
#include <compare>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace buildimpact {

/// Target names are case-sensitive exact identifiers.
using TargetId = std::string;

/// Durations are carried in milliseconds. Logs store integers; models may
/// hold fractional statistics (means, interpolated percentiles).
using Millis = double;

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

/// `dependency` executes first; `dependent` waits for it to finish.
struct DependencyEdge {
  TargetId dependency;
  TargetId dependent;

  friend auto operator<=>(const DependencyEdge&,
                          const DependencyEdge&) = default;
};

std::string to_string(const DependencyEdge& edge);

/// Targets in execution order, earliest first.
struct DependencyChain {
  std::vector<TargetId> targets;

  bool empty() const noexcept { return targets.empty(); }
  std::size_t size() const noexcept { return targets.size(); }
  const TargetId& front() const { return targets.front(); }
  const TargetId& back() const { return targets.back(); }

  /// Subchain [first, last).
  DependencyChain slice(std::size_t first, std::size_t last) const;
  /// Index of `target`, or size() when absent.
  std::size_t position(std::string_view target) const;

  friend auto operator<=>(const DependencyChain&,
                          const DependencyChain&) = default;
};

DependencyChain concat(const DependencyChain& a, const DependencyChain& b);
std::string to_string(const DependencyChain& chain);

/// Half-open interval [begin, end).
struct TimeWindow {
  Timestamp begin;
  Timestamp end;

  bool contains(Timestamp t) const noexcept { return begin <= t && t < end; }
  std::chrono::milliseconds span() const noexcept { return end - begin; }

  friend bool operator==(const TimeWindow&, const TimeWindow&) = default;
};

/// The `span`-long window that ends just before `end`.
TimeWindow trailing_window(Timestamp end, std::chrono::milliseconds span);

/// Parses an RFC 3339 instant ("2026-01-01T00:00:00Z", optional fractional
/// seconds and numeric offset). Throws ParseError.
Timestamp parse_timestamp(std::string_view text);
/// Formats as UTC with millisecond precision when non-zero.
std::string format_timestamp(Timestamp t);

}  // namespace buildimpact
