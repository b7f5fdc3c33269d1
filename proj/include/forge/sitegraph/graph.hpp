#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "forge/crawler/url.hpp"

namespace forge {

using NodeId = std::uint32_t;

/// Node flags recorded by the crawl and describe stages.
inline constexpr const char* kFlagFetchFailed = "fetch-failed";
inline constexpr const char* kFlagNonHtml = "non-html";
inline constexpr const char* kFlagFallback = "fallback";

struct NodeRecord {
  Url url;
  int depth = 0;
  std::optional<NodeId> parent;
  std::string content_ref;
  std::string title;
  std::string description;
  std::string language = "und";
  std::vector<std::string> flags;

  bool has_flag(std::string_view flag) const;
  friend bool operator==(const NodeRecord&, const NodeRecord&) = default;
};

/// A walk over one graph's edges.
struct Path {
  std::vector<NodeId> nodes;
  std::size_t length() const { return nodes.empty() ? 0 : nodes.size() - 1; }
  friend bool operator==(const Path&, const Path&) = default;
};

/// Directed page graph with a canonical shortest-path parent forest.
///
/// Edges are recorded from each page's out_links. Links to pages not yet in
/// the graph are held as pending edges and materialize when the target is
/// added, so depths always equal BFS distances from the root over the
/// recorded edge set. A depth only changes on strict improvement; ties keep
/// the earlier parent.
class SiteGraph {
 public:
  /// Adds (or revisits) the page at `url`. `discovered_from` is required for
  /// every node but the first. Throws unknown-parent when it names no node.
  NodeId add_page(const Url& url, std::optional<NodeId> discovered_from, const std::vector<Url>& out_links);

  bool empty() const { return nodes_.empty(); }
  std::size_t size() const { return nodes_.size(); }
  std::size_t edge_count() const;
  NodeId root() const { return 0; }

  const NodeRecord& node(NodeId id) const { return nodes_.at(id); }
  const std::vector<NodeRecord>& nodes() const { return nodes_; }
  /// Successors in the order the edges were recorded.
  const std::vector<NodeId>& successors(NodeId id) const { return adj_.at(id); }
  bool has_edge(NodeId from, NodeId to) const;
  std::optional<NodeId> find(const Url& url) const;
  bool contains(NodeId id) const { return id < nodes_.size(); }

  void set_content(NodeId id, std::string content_ref, std::string title, std::string language);
  void set_description(NodeId id, std::string description);
  void add_flag(NodeId id, const std::string& flag);

  /// Removes one edge. Depths are not recomputed; used to build damaged
  /// copies in tests and tools.
  bool remove_edge(NodeId from, NodeId to);

  friend bool operator==(const SiteGraph& a, const SiteGraph& b) {
    return a.nodes_ == b.nodes_ && a.adj_ == b.adj_;
  }

 private:
  void add_edge(NodeId from, NodeId to);
  void relax_from(NodeId start);

  std::vector<NodeRecord> nodes_;
  std::vector<std::vector<NodeId>> adj_;
  std::unordered_map<std::string, NodeId> by_url_;
  std::unordered_map<std::string, std::vector<NodeId>> pending_;

  friend SiteGraph graph_from_string(const std::string& text);
};

/// Nodes at depth 1, ascending.
std::vector<NodeId> first_level_nodes(const SiteGraph& g);

/// Hop distances from `from` (-1 when unreachable).
std::vector<int> bfs_distances(const SiteGraph& g, NodeId from);

/// Minimum-edge path; among equal lengths the lexicographically smallest
/// node sequence.
std::optional<Path> shortest_path(const SiteGraph& g, NodeId from, NodeId to);

/// Node addressed within a set of graphs.
struct GraphNode {
  std::uint32_t graph = 0;
  NodeId node = 0;
  friend auto operator<=>(const GraphNode&, const GraphNode&) = default;
};

/// Walk over one or more graphs. Consecutive steps in the same graph are
/// edges; a change of graph is a virtual cross-site hop.
struct GoldPath {
  std::vector<GraphNode> steps;
  /// Real edges traversed (virtual hops excluded).
  std::size_t length() const;
  friend bool operator==(const GoldPath&, const GoldPath&) = default;
};

using GraphSet = std::vector<const SiteGraph*>;

/// Minimum-length walk from each involved graph's root visiting all of that
/// graph's evidence nodes, exact over visit orders; per-graph walks are
/// joined in graph-id order. None when any required distance is infinite.
std::optional<GoldPath> gold_path(const GraphSet& graphs, const std::vector<GraphNode>& evidence);
std::optional<GoldPath> gold_path(const SiteGraph& graph, const std::vector<NodeId>& evidence);

// Persistence

inline constexpr int kGraphFormatVersion = 1;

std::string graph_to_string(const SiteGraph& g);
/// Throws corrupt-file or schema-version-mismatch.
SiteGraph graph_from_string(const std::string& text);
void save_graph(const SiteGraph& g, const std::filesystem::path& path);
SiteGraph load_graph(const std::filesystem::path& path);

/// sha256 of the serialized graph; ties verified tasks to their graph files.
std::string graph_digest(const SiteGraph& g);

}  // namespace forge
