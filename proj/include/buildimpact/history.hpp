#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "buildimpact/graph.hpp"
#include "buildimpact/time_model.hpp"
#include "buildimpact/types.hpp"

namespace buildimpact {

/// One target's outcome in one build. For cached targets the duration is
/// the retrieval cost, not a compile time.
struct TargetExecution {
  TargetId target;
  Millis duration = 0;
  bool cached = false;

  friend bool operator==(const TargetExecution&,
                         const TargetExecution&) = default;
};

struct BuildRecord {
  std::string build_id;
  Timestamp timestamp{};
  std::string graph_ref;
  std::vector<TargetExecution> executions;

  const TargetExecution* find(std::string_view target) const;

  friend bool operator==(const BuildRecord&, const BuildRecord&) = default;
};

/// Checks that `r` lists every target of `g` exactly once and that its
/// executed set is closed under the dependent relation. Throws
/// CoherenceError naming the first offending target.
void validate_record(const BuildRecord& r, const DependencyGraph& g);

/// Build records ordered by timestamp plus the graph snapshots they name.
class History {
 public:
  History() = default;
  /// Validates every record against its graph and stable-sorts by timestamp.
  History(std::vector<BuildRecord> records,
          std::map<std::string, DependencyGraph> graphs);

  const std::vector<BuildRecord>& records() const noexcept { return records_; }
  const std::map<std::string, DependencyGraph>& graphs() const noexcept {
    return graphs_;
  }
  const DependencyGraph& graph_for(const BuildRecord& r) const;
  bool empty() const noexcept { return records_.empty(); }
  std::size_t size() const noexcept { return records_.size(); }
  /// Index of the build, or size() when absent.
  std::size_t position(std::string_view build_id) const;

  /// History of the first `count` records (same graph snapshots).
  History truncated(std::size_t count) const;

  /// The `span`-long window ending at (and including) the latest build.
  TimeWindow window_through_latest(std::chrono::milliseconds span) const;

 private:
  std::vector<BuildRecord> records_;
  std::map<std::string, DependencyGraph> graphs_;
};

/// Reads a history directory: graph snapshots and build logs, one JSON
/// document per file. If `manifest.json` ({"files": [...]}) exists only the
/// files it lists are read, in that order; otherwise every `*.json` file in
/// name order. A file holding "build_id" is a build log, anything else a
/// graph snapshot whose graph_ref is its file name.
History ingest_history(const std::filesystem::path& dir);
/// Reads a single bundle document {"graphs": {ref: graph}, "builds": [...]}.
History ingest_history(std::istream& in);

/// Writes the directory layout ingest_history reads, manifest included.
void write_history(const std::filesystem::path& dir, const History& h);

/// Per-target statistic over non-cached durations of builds in `window`.
/// Every target seen in the window must have at least one non-cached sample;
/// NoDataError lists those that do not.
TimeModel build_time_model(const History& h, const TimeWindow& window,
                           Statistic stat);
/// Same, restricted to a subset of records (indices into h.records()).
TimeModel build_time_model(const History& h,
                           std::span<const std::size_t> records,
                           const TimeWindow& window, Statistic stat);

/// b(t): share of builds containing t in which t executed.
class CacheModel {
 public:
  CacheModel() = default;
  CacheModel(std::map<TargetId, double> built,
             std::map<TargetId, std::size_t> samples, TimeWindow window,
             std::vector<TargetId> warnings);

  std::optional<double> built_probability(std::string_view target) const;
  std::optional<double> cached_probability(std::string_view target) const;
  std::size_t samples(std::string_view target) const;

  const std::map<TargetId, double, std::less<>>& built() const noexcept {
    return built_;
  }
  const TimeWindow& window() const noexcept { return window_; }
  /// Known targets that appear in no build of the window.
  const std::vector<TargetId>& warnings() const noexcept { return warnings_; }

  friend bool operator==(const CacheModel&, const CacheModel&) = default;

 private:
  std::map<TargetId, double, std::less<>> built_;
  std::map<TargetId, std::size_t, std::less<>> samples_;
  TimeWindow window_{};
  std::vector<TargetId> warnings_;
};

/// Throws EmptyWindowError when no build falls inside the window.
CacheModel build_cache_model(const History& h, const TimeWindow& window);
CacheModel build_cache_model(const History& h,
                             std::span<const std::size_t> records,
                             const TimeWindow& window);

/// Critical path of a recorded build, recomputed from its durations and
/// graph. Zero-cost cached targets are left out of the chain.
DependencyChain realized_lcp(const BuildRecord& r, const DependencyGraph& g);
/// Wall-clock makespan implied by the record's durations.
Millis record_makespan(const BuildRecord& r, const DependencyGraph& g);

struct LcpProfile {
  DependencyChain lcp;
  std::size_t frequency = 0;
  double share = 0;

  friend bool operator==(const LcpProfile&, const LcpProfile&) = default;
};

struct LcpMining {
  std::vector<LcpProfile> profiles;
  double coverage = 0;             // sum of returned shares
  std::size_t window_builds = 0;   // share denominator
  std::size_t noop_builds = 0;     // builds with nothing executed

  friend bool operator==(const LcpMining&, const LcpMining&) = default;
};

/// Top-k realized LCPs by frequency (ties: lexicographic on names).
LcpMining mine_top_lcps(const History& h, std::size_t k,
                        const TimeWindow& window);
LcpMining mine_top_lcps(const History& h, std::span<const std::size_t> records,
                        std::size_t k, const TimeWindow& window);

}  // namespace buildimpact
