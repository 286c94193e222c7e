#include "buildimpact/json_io.hpp"

#include <cmath>

#include "buildimpact/error.hpp"

namespace buildimpact {

namespace {

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw ParseError(std::string("missing key \"") + key + "\"");
  }
  return j.at(key);
}

std::string string_field(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_string()) {
    throw ParseError(std::string("key \"") + key + "\" must be a string");
  }
  return v.get<std::string>();
}

/// Decoding errors from nlohmann surface as ParseError.
template <typename T>
T decode(const json& j, const char* what) {
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    throw ParseError(std::string(what) + ": " + e.what());
  }
}

json optional_number(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

std::optional<double> optional_number(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

}  // namespace

json graph_to_json(const DependencyGraph& g) {
  json out = json::object();
  out["targets"] = json::array();
  for (const auto& t : g.targets()) out["targets"].push_back({{"name", t}});
  out["edges"] = g.edges();
  return out;
}

DependencyGraph graph_from_json(const json& doc) {
  if (!doc.is_object()) throw ParseError("graph must be a JSON object");
  const json& targets = field(doc, "targets");
  const json& edges = field(doc, "edges");
  if (!targets.is_array() || !edges.is_array()) {
    throw ParseError("\"targets\" and \"edges\" must be arrays");
  }
  std::vector<TargetId> names;
  for (const auto& t : targets) names.push_back(string_field(t, "name"));
  std::vector<DependencyEdge> list;
  for (const auto& e : edges) {
    list.push_back({string_field(e, "dependency"), string_field(e, "dependent")});
  }
  return DependencyGraph(std::move(names), std::move(list));
}

json record_to_json(const BuildRecord& r) {
  json targets = json::array();
  for (const auto& e : r.executions) {
    targets.push_back({{"name", e.target},
                       {"duration_ms", static_cast<std::int64_t>(
                                           std::llround(e.duration))},
                       {"cached", e.cached}});
  }
  return {{"build_id", r.build_id},
          {"timestamp", format_timestamp(r.timestamp)},
          {"graph_ref", r.graph_ref},
          {"targets", std::move(targets)}};
}

BuildRecord record_from_json(const json& doc) {
  BuildRecord r;
  r.build_id = string_field(doc, "build_id");
  if (r.build_id.empty()) throw ParseError("empty build_id");
  r.timestamp = parse_timestamp(string_field(doc, "timestamp"));
  r.graph_ref = string_field(doc, "graph_ref");
  const json& targets = field(doc, "targets");
  if (!targets.is_array()) throw ParseError("\"targets\" must be an array");
  for (const auto& t : targets) {
    TargetExecution e;
    e.target = string_field(t, "name");
    const json& ms = field(t, "duration_ms");
    if (!ms.is_number_integer()) {
      throw ParseError("duration_ms of '" + e.target + "' must be an integer");
    }
    e.duration = static_cast<Millis>(ms.get<std::int64_t>());
    if (e.duration < 0) {
      throw ParseError("duration_ms of '" + e.target + "' is negative");
    }
    const json& cached = field(t, "cached");
    if (!cached.is_boolean()) {
      throw ParseError("cached of '" + e.target + "' must be a boolean");
    }
    e.cached = cached.get<bool>();
    r.executions.push_back(std::move(e));
  }
  return r;
}

void to_json(json& j, const DependencyEdge& e) {
  j = {{"dependency", e.dependency}, {"dependent", e.dependent}};
}

void from_json(const json& j, DependencyEdge& e) {
  e.dependency = string_field(j, "dependency");
  e.dependent = string_field(j, "dependent");
}

void to_json(json& j, const DependencyChain& c) { j = c.targets; }

void from_json(const json& j, DependencyChain& c) {
  c.targets = decode<std::vector<TargetId>>(j, "chain");
}

void to_json(json& j, const GraphDiff& d) {
  j = {{"added_edges", d.added_edges},
       {"removed_edges", d.removed_edges},
       {"added_targets", d.added_targets},
       {"removed_targets", d.removed_targets}};
}

void from_json(const json& j, GraphDiff& d) {
  d.added_edges = field(j, "added_edges").get<std::vector<DependencyEdge>>();
  d.removed_edges = field(j, "removed_edges").get<std::vector<DependencyEdge>>();
  d.added_targets = decode<std::vector<TargetId>>(field(j, "added_targets"),
                                                  "added_targets");
  d.removed_targets = decode<std::vector<TargetId>>(
      field(j, "removed_targets"), "removed_targets");
}

void to_json(json& j, const EdgeClassification& c) {
  j = {{"kind", to_string(c.kind)}};
  j["lcp"] = c.lcp ? json(*c.lcp) : json(nullptr);
  j["lcp_index"] = c.lcp_index ? json(*c.lcp_index) : json(nullptr);
}

void from_json(const json& j, EdgeClassification& c) {
  c.kind = parse_edge_kind(string_field(j, "kind"));
  const json& lcp = field(j, "lcp");
  c.lcp = lcp.is_null() ? std::nullopt
                        : std::optional<DependencyChain>(lcp.get<DependencyChain>());
  const json& index = field(j, "lcp_index");
  c.lcp_index = index.is_null()
                    ? std::nullopt
                    : std::optional<std::size_t>(index.get<std::size_t>());
}

void to_json(json& j, const LcpProfile& p) {
  j = {{"lcp", p.lcp}, {"frequency", p.frequency}, {"share", p.share}};
}

void from_json(const json& j, LcpProfile& p) {
  p.lcp = field(j, "lcp").get<DependencyChain>();
  p.frequency = field(j, "frequency").get<std::size_t>();
  p.share = field(j, "share").get<double>();
}

void to_json(json& j, const LcpMining& m) {
  j = {{"profiles", m.profiles},
       {"coverage", m.coverage},
       {"window_builds", m.window_builds},
       {"noop_builds", m.noop_builds}};
}

void from_json(const json& j, LcpMining& m) {
  m.profiles = field(j, "profiles").get<std::vector<LcpProfile>>();
  m.coverage = field(j, "coverage").get<double>();
  m.window_builds = field(j, "window_builds").get<std::size_t>();
  m.noop_builds = field(j, "noop_builds").get<std::size_t>();
}

void to_json(json& j, const ImpactEstimate& e) {
  j = {{"edge", e.edge},
       {"classification", e.classification},
       {"impacts_lcp", e.impacts_lcp},
       {"lcp_old", e.lcp_old},
       {"delta_ms", e.delta},
       {"affected_fraction", e.affected_fraction},
       {"gating_target", e.gating_target},
       {"notes", e.notes}};
  j["lcp_new"] = e.lcp_new ? json(*e.lcp_new) : json(nullptr);
}

void from_json(const json& j, ImpactEstimate& e) {
  e.edge = field(j, "edge").get<DependencyEdge>();
  e.classification = field(j, "classification").get<EdgeClassification>();
  e.impacts_lcp = field(j, "impacts_lcp").get<bool>();
  e.lcp_old = field(j, "lcp_old").get<DependencyChain>();
  const json& lcp_new = field(j, "lcp_new");
  e.lcp_new = lcp_new.is_null()
                  ? std::nullopt
                  : std::optional<DependencyChain>(lcp_new.get<DependencyChain>());
  e.delta = field(j, "delta_ms").get<double>();
  e.affected_fraction = field(j, "affected_fraction").get<double>();
  e.gating_target = string_field(j, "gating_target");
  e.notes = decode<std::vector<std::string>>(field(j, "notes"), "notes");
}

void to_json(json& j, const SimResult& r) {
  j = {{"makespan_ms", r.makespan},
       {"critical_path", r.critical_path},
       {"executed", r.executed},
       {"finish_times_ms", r.finish_times}};
}

void from_json(const json& j, SimResult& r) {
  r.makespan = field(j, "makespan_ms").get<double>();
  r.critical_path = field(j, "critical_path").get<DependencyChain>();
  r.executed = decode<std::set<TargetId>>(field(j, "executed"), "executed");
  r.finish_times = decode<std::map<TargetId, Millis>>(
      field(j, "finish_times_ms"), "finish_times_ms");
}

void to_json(json& j, const PastFutureResult& r) {
  j = {{"p_value", r.p_value},
       {"observed_delta_ms", r.observed_delta},
       {"observed_affected_fraction", r.observed_affected_fraction},
       {"past_sample_ms", r.past_sample},
       {"future_sample_ms", r.future_sample},
       {"past_period", r.past_period},
       {"future_period", r.future_period},
       {"diagnostics",
        {{"past_near_miss", r.past_near_miss},
         {"future_near_miss", r.future_near_miss}}}};
}

void from_json(const json& j, PastFutureResult& r) {
  r.p_value = field(j, "p_value").get<double>();
  r.observed_delta = field(j, "observed_delta_ms").get<double>();
  r.observed_affected_fraction =
      field(j, "observed_affected_fraction").get<double>();
  r.past_sample = field(j, "past_sample_ms").get<std::vector<double>>();
  r.future_sample = field(j, "future_sample_ms").get<std::vector<double>>();
  r.past_period = field(j, "past_period").get<std::size_t>();
  r.future_period = field(j, "future_period").get<std::size_t>();
  const json& diag = field(j, "diagnostics");
  r.past_near_miss = field(diag, "past_near_miss").get<std::size_t>();
  r.future_near_miss = field(diag, "future_near_miss").get<std::size_t>();
}

void to_json(json& j, const EvalOutcome& o) {
  j = {{"build_id", o.build_id},
       {"estimate", o.estimate},
       {"current_lcp_match", o.current_lcp_match},
       {"current_check_vacuous", o.current_check_vacuous},
       {"note", o.note}};
  j["past_future"] = o.past_future ? json(*o.past_future) : json(nullptr);
}

void from_json(const json& j, EvalOutcome& o) {
  o.build_id = string_field(j, "build_id");
  o.estimate = field(j, "estimate").get<ImpactEstimate>();
  o.current_lcp_match = field(j, "current_lcp_match").get<bool>();
  o.current_check_vacuous = field(j, "current_check_vacuous").get<bool>();
  o.note = string_field(j, "note");
  const json& pf = field(j, "past_future");
  o.past_future =
      pf.is_null() ? std::nullopt
                   : std::optional<PastFutureResult>(pf.get<PastFutureResult>());
}

void to_json(json& j, const TuningRow& r) {
  j = {{"top_k", r.top_k},
       {"window_ms", r.window.count()},
       {"stat", to_string(r.stat)},
       {"outcomes", r.outcomes},
       {"match_rate", optional_number(r.match_rate)},
       {"delta_error", optional_number(r.delta_error)},
       {"fraction_error", optional_number(r.fraction_error)}};
}

void from_json(const json& j, TuningRow& r) {
  r.top_k = field(j, "top_k").get<std::size_t>();
  r.window = std::chrono::milliseconds{field(j, "window_ms").get<std::int64_t>()};
  r.stat = parse_statistic(string_field(j, "stat"));
  r.outcomes = field(j, "outcomes").get<std::size_t>();
  r.match_rate = optional_number(field(j, "match_rate"));
  r.delta_error = optional_number(field(j, "delta_error"));
  r.fraction_error = optional_number(field(j, "fraction_error"));
}

}  // namespace buildimpact
