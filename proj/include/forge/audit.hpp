#pragma once

#include <map>
#include <string>
#include <vector>

#include "forge/llm/ledger.hpp"
#include "forge/qc.hpp"
#include "forge/sitegraph/graph.hpp"

namespace forge {

/// Nodes one task touches in one graph.
struct TaskFootprint {
  std::string task_id;
  std::vector<NodeId> nodes;
};

enum class CoverageBasis { evidence_and_gold_path, evidence_only };

/// Footprint of `task` in graph `graph_id`.
TaskFootprint footprint(const VerifiedTask& task, std::uint32_t graph_id, CoverageBasis basis);

struct CoverageReport {
  std::size_t first_level_total = 0;
  std::size_t exercised = 0;
  double rate = 0;
  /// Every first-level node, with the ids of the tasks exercising it.
  std::map<NodeId, std::vector<std::string>> per_node;

  std::string to_json(const SiteGraph& g) const;
  /// "coverage: E/T = R"
  std::string summary_line() const;
};

/// The depth-1 ancestor of `node` along the parent forest; none for the root.
std::optional<NodeId> first_level_ancestor(const SiteGraph& g, NodeId node);

/// A first-level node is exercised when a footprint touches its
/// parent-forest subtree. Throws task-references-unknown-node.
CoverageReport page_coverage(const SiteGraph& g, const std::vector<TaskFootprint>& tasks);
CoverageReport page_coverage(const SiteGraph& g, const std::vector<VerifiedTask>& tasks, std::uint32_t graph_id = 0,
                             CoverageBasis basis = CoverageBasis::evidence_and_gold_path);

struct ReplayStep {
  std::uint32_t graph = 0;
  NodeId node = 0;
  std::string url;
  bool evidence_hit = false;
};

struct ReplayTrace {
  std::string task_id;
  std::vector<ReplayStep> steps;
  bool complete = false;

  std::string to_string() const;
};

/// Walks the gold path hop by hop. Throws broken-edge when a graph's digest
/// differs from the one the task was verified against or a hop is not an
/// edge, and evidence-not-on-path when an evidence node is never visited.
ReplayTrace replay(const GraphSet& graphs, const VerifiedTask& task);

struct StageCost {
  std::size_t calls = 0;
  std::size_t wire_calls = 0;
  std::size_t cached = 0;
  std::size_t notes = 0;
  std::int64_t input_tokens = 0;
  std::int64_t output_tokens = 0;
  Money cost;
};

struct CostReport {
  /// Keyed by top-level stage: describe, embed, generate, verify.
  std::map<std::string, StageCost> stages;
  /// Finer breakdown keyed by the full ledger tag (verify.correctness, ...).
  std::map<std::string, StageCost> tags;
  std::size_t verified_tasks = 0;
  std::size_t drafts = 0;
  Money total_cost;
  /// (generate + verify) chat calls divided by verified tasks.
  double chat_calls_per_verified = 0;
  double rejected_per_verified = 0;
  /// 5 + 5 * rejected_per_verified.
  double call_bound = 0;
  bool within_bound = true;
  Money cost_per_verified;

  std::string to_text() const;
};

/// `drafts` is the number of drafts that entered QC.
CostReport cost_report(const CostLedger& ledger, std::size_t verified_tasks, std::size_t drafts);

}  // namespace forge
