#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "forge/sitegraph/graph.hpp"

namespace forge {

class LlmClient;

/// Unit-normalized node embeddings with exact cosine search.
struct RetrievalIndex {
  std::size_t dim = 0;
  std::string model_id;
  std::map<NodeId, std::vector<float>> vectors;

  bool contains(NodeId id) const { return vectors.count(id) != 0; }
  std::size_t size() const { return vectors.size(); }
  std::vector<NodeId> ids() const;

  /// Inserts `v` scaled to unit length. Throws protocol-error on a dimension
  /// mismatch or a zero vector.
  void add(NodeId id, const std::vector<float>& v);

  friend bool operator==(const RetrievalIndex&, const RetrievalIndex&) = default;
};

/// Dot product of two unit vectors accumulated in double.
double cosine(const std::vector<float>& a, const std::vector<float>& b);

struct IndexBuildReport {
  std::vector<NodeId> excluded;
  std::vector<std::string> reasons;
};

/// Embeds every node description (stage "embed"). Nodes without a
/// description or whose embedding fails are excluded and reported. Throws
/// empty-index when nothing could be indexed.
RetrievalIndex build_index(const SiteGraph& graph, LlmClient& client, IndexBuildReport* report = nullptr);

struct Neighbor {
  NodeId id;
  double similarity;
  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// The k most similar nodes other than `seed`, descending; ties by
/// ascending id. Throws seed-not-indexed.
std::vector<Neighbor> top_k(const RetrievalIndex& index, NodeId seed, std::size_t k);

inline constexpr std::size_t kDefaultTopK = 10;

struct PairSample {
  std::uint32_t seed_graph = 0;
  NodeId seed = 0;
  std::uint32_t secondary_graph = 0;
  NodeId secondary = 0;
  double similarity = 0;
  std::uint64_t rng_seed = 0;

  friend bool operator==(const PairSample&, const PairSample&) = default;
};

/// Seed uniform over indexed nodes, secondary uniform over top_k(seed, k).
/// Throws index-too-small below two nodes.
PairSample sample_pair(const RetrievalIndex& index, std::size_t k, std::uint64_t rng_seed);

/// Seed uniform over `a` (graph 0), secondary the nearest node of `b`
/// (graph 1). Throws empty-index.
PairSample sample_cross_pair(const RetrievalIndex& a, const RetrievalIndex& b, std::uint64_t rng_seed);

inline constexpr int kIndexFormatVersion = 1;

std::string index_to_string(const RetrievalIndex& index);
RetrievalIndex index_from_string(const std::string& text);
void save_index(const RetrievalIndex& index, const std::filesystem::path& path);
RetrievalIndex load_index(const std::filesystem::path& path);

}  // namespace forge
