#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "buildimpact/time_model.hpp"
#include "buildimpact/types.hpp"

namespace buildimpact {

/// Immutable DAG of build targets. Targets are kept sorted by name and are
/// addressed either by name or by their index in that order, so every
/// adjacency list is also sorted by name.
class DependencyGraph {
 public:
  DependencyGraph() = default;

  /// Validates and builds the graph. Duplicate edges collapse; duplicate
  /// target names are a ParseError. Throws SelfLoopError,
  /// DanglingEndpointError or CycleError.
  DependencyGraph(std::vector<TargetId> targets,
                  std::vector<DependencyEdge> edges);

  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<TargetId>& targets() const noexcept { return names_; }
  const std::vector<DependencyEdge>& edges() const noexcept { return edges_; }

  bool contains(std::string_view target) const;
  std::optional<std::size_t> find(std::string_view target) const;
  /// Throws UnknownTargetError.
  std::size_t index_of(std::string_view target) const;
  const TargetId& name(std::size_t index) const { return names_[index]; }

  std::span<const std::size_t> prerequisites(std::size_t index) const {
    return prerequisites_[index];
  }
  std::span<const std::size_t> dependents(std::size_t index) const {
    return dependents_[index];
  }
  /// Kahn order, smallest name first among ready targets.
  std::span<const std::size_t> topological_order() const { return topo_; }

  bool has_edge(const DependencyEdge& edge) const;
  DependencyGraph without_edge(const DependencyEdge& edge) const;
  DependencyGraph with_edges(std::span<const DependencyEdge> extra) const;

  friend bool operator==(const DependencyGraph& a, const DependencyGraph& b) {
    return a.names_ == b.names_ && a.edges_ == b.edges_;
  }

 private:
  std::vector<TargetId> names_;
  std::vector<DependencyEdge> edges_;
  std::map<TargetId, std::size_t, std::less<>> index_;
  std::vector<std::vector<std::size_t>> prerequisites_;
  std::vector<std::vector<std::size_t>> dependents_;
  std::vector<std::size_t> topo_;
};

/// Graph file: {"targets": [{"name": ...}], "edges": [{"dependency": ...,
/// "dependent": ...}]}.
DependencyGraph load_graph(std::istream& in);
DependencyGraph load_graph_file(const std::filesystem::path& path);
void write_graph(std::ostream& out, const DependencyGraph& g);

bool is_valid_chain(const DependencyGraph& g, const DependencyChain& chain);

/// `changed` plus every transitive dependent: exactly the targets that must
/// execute; everything else may come from cache.
std::set<TargetId> dirty_closure(const DependencyGraph& g,
                                 const std::set<TargetId>& changed);

struct GraphDiff {
  std::vector<DependencyEdge> added_edges;
  std::vector<DependencyEdge> removed_edges;
  std::vector<TargetId> added_targets;
  std::vector<TargetId> removed_targets;

  bool empty() const noexcept {
    return added_edges.empty() && removed_edges.empty() &&
           added_targets.empty() && removed_targets.empty();
  }
  friend bool operator==(const GraphDiff&, const GraphDiff&) = default;
};

/// Set difference on targets and edges, every list sorted by name.
GraphDiff graph_diff(const DependencyGraph& prev, const DependencyGraph& curr);
DependencyGraph apply_diff(const DependencyGraph& g, const GraphDiff& diff);

enum class EdgeKind { Outward, Inward, Unrelated };

std::string to_string(EdgeKind kind);
EdgeKind parse_edge_kind(std::string_view text);

/// Outward: the edge's dependent is lcp[lcp_index]. Inward: the edge's
/// dependency is lcp[lcp_index]. Unrelated carries neither.
struct EdgeClassification {
  EdgeKind kind = EdgeKind::Unrelated;
  std::optional<DependencyChain> lcp;
  std::optional<std::size_t> lcp_index;

  friend bool operator==(const EdgeClassification&,
                         const EdgeClassification&) = default;
};

/// One entry per (LCP, role) the edge touches, in `lcps` order with Outward
/// before Inward; a single Unrelated entry if it touches none.
std::vector<EdgeClassification> classify_edge(
    const DependencyEdge& edge, std::span<const DependencyChain> lcps);

/// Heaviest path (per `tm`) from a source target to `node`, inclusive.
/// Ties go to the lexicographically smaller predecessor at each step.
DependencyChain upstream_chain(const DependencyGraph& g, const TimeModel& tm,
                               std::string_view node);
/// Heaviest path from `node` to a sink of its dependent subtree.
DependencyChain downstream_chain(const DependencyGraph& g, const TimeModel& tm,
                                 std::string_view node);

}  // namespace buildimpact
