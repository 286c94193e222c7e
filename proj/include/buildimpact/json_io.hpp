#pragma once

// JSON encodings of the file formats and reports. Every report type decodes
// back into the value it was encoded from.

#include <json.hpp>

#include "buildimpact/estimator.hpp"
#include "buildimpact/evaluation.hpp"
#include "buildimpact/graph.hpp"
#include "buildimpact/history.hpp"
#include "buildimpact/simulator.hpp"

namespace buildimpact {

using nlohmann::json;

json graph_to_json(const DependencyGraph& g);
/// Throws ParseError on malformed content plus the graph constructor's
/// validation errors.
DependencyGraph graph_from_json(const json& doc);

json record_to_json(const BuildRecord& r);
BuildRecord record_from_json(const json& doc);

void to_json(json& j, const DependencyEdge& e);
void from_json(const json& j, DependencyEdge& e);
void to_json(json& j, const DependencyChain& c);
void from_json(const json& j, DependencyChain& c);
void to_json(json& j, const GraphDiff& d);
void from_json(const json& j, GraphDiff& d);
void to_json(json& j, const EdgeClassification& c);
void from_json(const json& j, EdgeClassification& c);
void to_json(json& j, const LcpProfile& p);
void from_json(const json& j, LcpProfile& p);
void to_json(json& j, const LcpMining& m);
void from_json(const json& j, LcpMining& m);
void to_json(json& j, const ImpactEstimate& e);
void from_json(const json& j, ImpactEstimate& e);
void to_json(json& j, const SimResult& r);
void from_json(const json& j, SimResult& r);
void to_json(json& j, const PastFutureResult& r);
void from_json(const json& j, PastFutureResult& r);
void to_json(json& j, const EvalOutcome& o);
void from_json(const json& j, EvalOutcome& o);
void to_json(json& j, const TuningRow& r);
void from_json(const json& j, TuningRow& r);

}  // namespace buildimpact
