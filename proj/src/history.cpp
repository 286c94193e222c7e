#include "buildimpact/history.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <numeric>
#include <set>

#include "buildimpact/error.hpp"
#include "buildimpact/json_io.hpp"
#include "buildimpact/schedule.hpp"

namespace buildimpact {

namespace fs = std::filesystem;

const TargetExecution* BuildRecord::find(std::string_view target) const {
  for (const auto& e : executions) {
    if (e.target == target) return &e;
  }
  return nullptr;
}

void validate_record(const BuildRecord& r, const DependencyGraph& g) {
  std::vector<const TargetExecution*> by_index(g.size(), nullptr);
  for (const auto& e : r.executions) {
    const auto i = g.find(e.target);
    if (!i) {
      throw CoherenceError(r.build_id, e.target,
                           "is not in graph '" + r.graph_ref + "'");
    }
    if (by_index[*i]) {
      throw CoherenceError(r.build_id, e.target, "appears more than once");
    }
    if (!(e.duration >= 0)) {
      throw CoherenceError(r.build_id, e.target, "has a negative duration");
    }
    by_index[*i] = &e;
  }
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!by_index[i]) {
      throw CoherenceError(r.build_id, g.name(i), "is missing from the record");
    }
  }
  for (const std::size_t v : g.topological_order()) {
    if (!by_index[v]->cached) continue;
    for (const std::size_t p : g.prerequisites(v)) {
      if (!by_index[p]->cached) {
        throw CoherenceError(r.build_id, g.name(v),
                             "is cached but depends on executed target '" +
                                 g.name(p) + "'");
      }
    }
  }
}

History::History(std::vector<BuildRecord> records,
                 std::map<std::string, DependencyGraph> graphs)
    : records_(std::move(records)), graphs_(std::move(graphs)) {
  std::set<std::string_view> ids;
  for (const auto& r : records_) {
    if (!ids.insert(r.build_id).second) {
      throw ParseError("duplicate build_id '" + r.build_id + "'");
    }
    validate_record(r, graph_for(r));
  }
  std::stable_sort(records_.begin(), records_.end(),
                   [](const BuildRecord& a, const BuildRecord& b) {
                     return a.timestamp < b.timestamp;
                   });
}

const DependencyGraph& History::graph_for(const BuildRecord& r) const {
  const auto it = graphs_.find(r.graph_ref);
  if (it == graphs_.end()) {
    throw ParseError("build '" + r.build_id + "' references unknown graph '" +
                     r.graph_ref + "'");
  }
  return it->second;
}

std::size_t History::position(std::string_view build_id) const {
  for (std::size_t i = 0; i < records_.size(); ++i) {
    if (records_[i].build_id == build_id) return i;
  }
  return records_.size();
}

History History::truncated(std::size_t count) const {
  History out;
  out.records_.assign(records_.begin(),
                      records_.begin() + static_cast<std::ptrdiff_t>(
                                             std::min(count, records_.size())));
  out.graphs_ = graphs_;
  return out;
}

TimeWindow History::window_through_latest(
    std::chrono::milliseconds span) const {
  if (records_.empty()) throw EmptyWindowError("history");
  const Timestamp end = records_.back().timestamp + std::chrono::milliseconds{1};
  return trailing_window(end, span);
}

namespace {

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace

History ingest_history(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw ParseError("history directory not found: " + dir.string());
  }
  std::vector<std::string> files;
  const fs::path manifest = dir / "manifest.json";
  if (fs::exists(manifest)) {
    const json doc = read_json_file(manifest);
    if (!doc.is_object() || !doc.contains("files") ||
        !doc["files"].is_array()) {
      throw ParseError(manifest.string() + ": expected {\"files\": [...]}");
    }
    for (const auto& f : doc["files"]) {
      if (!f.is_string()) throw ParseError(manifest.string() + ": bad entry");
      files.push_back(f.get<std::string>());
    }
  } else {
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (!entry.is_regular_file() || entry.path().extension() != ".json") {
        continue;
      }
      files.push_back(entry.path().filename().string());
    }
    std::sort(files.begin(), files.end());
  }

  std::vector<BuildRecord> records;
  std::map<std::string, DependencyGraph> graphs;
  for (const auto& name : files) {
    const json doc = read_json_file(dir / name);
    try {
      if (doc.is_object() && doc.contains("build_id")) {
        records.push_back(record_from_json(doc));
      } else {
        graphs.emplace(name, graph_from_json(doc));
      }
    } catch (const ParseError& e) {
      throw ParseError(name + ": " + e.what());
    }
  }
  return History(std::move(records), std::move(graphs));
}

History ingest_history(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(std::string("history bundle: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("graphs") || !doc.contains("builds") ||
      !doc["graphs"].is_object() || !doc["builds"].is_array()) {
    throw ParseError("history bundle: expected {\"graphs\": {}, \"builds\": []}");
  }
  std::map<std::string, DependencyGraph> graphs;
  for (const auto& [ref, g] : doc["graphs"].items()) {
    graphs.emplace(ref, graph_from_json(g));
  }
  std::vector<BuildRecord> records;
  for (const auto& b : doc["builds"]) records.push_back(record_from_json(b));
  return History(std::move(records), std::move(graphs));
}

void write_history(const fs::path& dir, const History& h) {
  fs::create_directories(dir);
  json manifest = json::object();
  manifest["files"] = json::array();
  const auto write = [&](const std::string& name, const json& doc) {
    if (fs::path(name).filename().string() != name) {
      throw PreconditionError("history file name must be plain: " + name);
    }
    std::ofstream out(dir / name);
    if (!out) throw ParseError("cannot write " + (dir / name).string());
    out << doc.dump(2) << '\n';
    manifest["files"].push_back(name);
  };
  for (const auto& [ref, g] : h.graphs()) write(ref, graph_to_json(g));
  for (const auto& r : h.records()) write(r.build_id + ".json", record_to_json(r));
  std::ofstream out(dir / "manifest.json");
  out << manifest.dump(2) << '\n';
}

namespace {

std::vector<std::size_t> all_indices(const History& h) {
  std::vector<std::size_t> out(h.size());
  std::iota(out.begin(), out.end(), std::size_t{0});
  return out;
}

}  // namespace

TimeModel build_time_model(const History& h, const TimeWindow& window,
                           Statistic stat) {
  const auto indices = all_indices(h);
  return build_time_model(h, indices, window, stat);
}

TimeModel build_time_model(const History& h,
                           std::span<const std::size_t> records,
                           const TimeWindow& window, Statistic stat) {
  std::set<TargetId> seen;
  std::map<TargetId, std::vector<Millis>> samples;
  std::size_t in_window = 0;
  for (const std::size_t i : records) {
    const auto& r = h.records().at(i);
    if (!window.contains(r.timestamp)) continue;
    ++in_window;
    for (const auto& e : r.executions) {
      seen.insert(e.target);
      if (!e.cached) samples[e.target].push_back(e.duration);
    }
  }
  if (in_window == 0) throw EmptyWindowError("time model");
  std::vector<TargetId> missing;
  for (const auto& t : seen) {
    if (!samples.count(t)) missing.push_back(t);
  }
  if (!missing.empty()) throw NoDataError(std::move(missing));

  std::map<TargetId, Millis> durations;
  for (const auto& [t, sample] : samples) {
    durations.emplace(t, summarize(sample, stat));
  }
  return TimeModel(std::move(durations), stat, window);
}

CacheModel::CacheModel(std::map<TargetId, double> built,
                       std::map<TargetId, std::size_t> samples,
                       TimeWindow window, std::vector<TargetId> warnings)
    : built_(built.begin(), built.end()),
      samples_(samples.begin(), samples.end()),
      window_(window),
      warnings_(std::move(warnings)) {
  for (const auto& [t, b] : built_) {
    if (!(b >= 0 && b <= 1)) {
      throw PreconditionError("build probability out of [0,1] for '" + t + "'");
    }
  }
}

std::optional<double> CacheModel::built_probability(
    std::string_view target) const {
  const auto it = built_.find(target);
  if (it == built_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> CacheModel::cached_probability(
    std::string_view target) const {
  const auto b = built_probability(target);
  if (!b) return std::nullopt;
  return 1.0 - *b;
}

std::size_t CacheModel::samples(std::string_view target) const {
  const auto it = samples_.find(target);
  return it == samples_.end() ? 0 : it->second;
}

CacheModel build_cache_model(const History& h, const TimeWindow& window) {
  const auto indices = all_indices(h);
  return build_cache_model(h, indices, window);
}

CacheModel build_cache_model(const History& h,
                             std::span<const std::size_t> records,
                             const TimeWindow& window) {
  std::map<TargetId, std::size_t> present;
  std::map<TargetId, std::size_t> executed;
  std::set<std::string> graph_refs;
  std::size_t in_window = 0;
  for (const std::size_t i : records) {
    const auto& r = h.records().at(i);
    graph_refs.insert(r.graph_ref);
    if (!window.contains(r.timestamp)) continue;
    ++in_window;
    for (const auto& e : r.executions) {
      ++present[e.target];
      if (!e.cached) ++executed[e.target];
    }
  }
  if (in_window == 0) throw EmptyWindowError("cache model");

  std::map<TargetId, double> built;
  for (const auto& [t, n] : present) {
    const auto it = executed.find(t);
    const std::size_t hits = it == executed.end() ? 0 : it->second;
    built.emplace(t, static_cast<double>(hits) / static_cast<double>(n));
  }
  std::set<TargetId> absent;
  for (const auto& ref : graph_refs) {
    for (const auto& t : h.graphs().at(ref).targets()) {
      if (!present.count(t)) absent.insert(t);
    }
  }
  return CacheModel(std::move(built), std::move(present), window,
                    {absent.begin(), absent.end()});
}

namespace {

Schedule record_schedule(const BuildRecord& r, const DependencyGraph& g) {
  validate_record(r, g);
  std::vector<Millis> cost(g.size(), 0);
  std::vector<bool> executed(g.size(), false);
  for (const auto& e : r.executions) {
    const std::size_t i = g.index_of(e.target);
    cost[i] = e.duration;
    executed[i] = !e.cached;
  }
  return schedule_build(g, cost, executed);
}

}  // namespace

DependencyChain realized_lcp(const BuildRecord& r, const DependencyGraph& g) {
  return record_schedule(r, g).critical_path;
}

Millis record_makespan(const BuildRecord& r, const DependencyGraph& g) {
  return record_schedule(r, g).makespan;
}

LcpMining mine_top_lcps(const History& h, std::size_t k,
                        const TimeWindow& window) {
  const auto indices = all_indices(h);
  return mine_top_lcps(h, indices, k, window);
}

LcpMining mine_top_lcps(const History& h, std::span<const std::size_t> records,
                        std::size_t k, const TimeWindow& window) {
  if (k == 0) throw PreconditionError("top-k must be at least 1");
  LcpMining out;
  std::map<DependencyChain, std::size_t> counts;
  for (const std::size_t i : records) {
    const auto& r = h.records().at(i);
    if (!window.contains(r.timestamp)) continue;
    ++out.window_builds;
    DependencyChain lcp = realized_lcp(r, h.graph_for(r));
    if (lcp.empty()) {
      ++out.noop_builds;
      continue;
    }
    ++counts[std::move(lcp)];
  }
  if (out.window_builds == 0) throw EmptyWindowError("LCP mining");

  std::vector<std::pair<DependencyChain, std::size_t>> ranked(counts.begin(),
                                                              counts.end());
  // `counts` is already in lexicographic order, so a stable sort on
  // frequency keeps that order among ties.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) {
                     return a.second > b.second;
                   });
  const auto total = static_cast<double>(out.window_builds);
  for (std::size_t i = 0; i < ranked.size() && i < k; ++i) {
    const double share = static_cast<double>(ranked[i].second) / total;
    out.profiles.push_back({ranked[i].first, ranked[i].second, share});
    out.coverage += share;
  }
  return out;
}

}  // namespace buildimpact
