#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "forge/audit.hpp"
#include "forge/crawler/crawl.hpp"
#include "forge/llm/client.hpp"
#include "forge/qc.hpp"
#include "forge/retrieval.hpp"
#include "forge/taskgen.hpp"

namespace forge {

struct GenerationConfig {
  std::size_t k = kDefaultTopK;
  std::size_t n_tasks = 100;
  std::uint64_t rng_seed = 0;
  TaskMode mode = TaskMode::intra;
  std::string language_policy = "seed";
  bool dedupe = false;
};

struct PathsConfig {
  std::filesystem::path workdir = "work";
  std::filesystem::path graph = "graph.jsonl";
  std::filesystem::path graph_b = "graph_b.jsonl";
  std::filesystem::path index = "index.jsonl";
  std::filesystem::path index_b = "index_b.jsonl";
  std::filesystem::path drafts = "drafts.jsonl";
  std::filesystem::path verified = "verified.jsonl";
  std::filesystem::path rejections = "rejections.jsonl";
  std::filesystem::path benchmark = "benchmark.jsonl";
  std::filesystem::path summary = "summary.txt";
  std::filesystem::path ledger_dir = "ledger";

  /// `p` resolved against the workdir unless absolute.
  std::filesystem::path at(const std::filesystem::path& p) const;
};

struct PipelineConfig {
  CrawlConfig crawl;
  /// Second site for inter-website mode.
  std::optional<CrawlConfig> crawl_b;
  ProviderConfig provider;
  GenerationConfig generation;
  QcOptions qc;
  PathsConfig paths;
  /// Scripted provider; empty selects the HTTP provider.
  std::filesystem::path stub_script;

  /// Snapshot and cache directories default to the workdir.
  void resolve_defaults();
  void validate() const;
};

/// Parses the INI-style config. Relative paths are taken relative to the
/// file's directory. Throws config-error.
PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = ".");

/// Applies one "section.key=value" override.
void apply_override(PipelineConfig& config, const std::string& assignment,
                    const std::filesystem::path& base_dir = ".");

/// Extracted page content for nodes of one or more crawled graphs, read
/// from their snapshots. Thread-safe, memoized.
class ContentStore {
 public:
  ContentStore(GraphSet graphs, std::vector<std::filesystem::path> snapshot_dirs, ScopeRule scope);
  PageContent get(const GraphNode& node);
  ContentLookup lookup();

 private:
  GraphSet graphs_;
  std::vector<std::shared_ptr<SnapshotStore>> stores_;
  ScopeRule scope_;
  std::mutex mu_;
  std::map<GraphNode, PageContent> cache_;
};

struct StageResult {
  std::string stage;
  std::string message;
};

/// The stage runner behind the CLI and the Python module. Every stage reads
/// only the artifacts of earlier stages from the workdir.
class Pipeline {
 public:
  explicit Pipeline(PipelineConfig config, std::shared_ptr<Provider> provider = nullptr);

  StageResult crawl();
  StageResult describe();
  StageResult index();
  StageResult generate();
  StageResult verify();
  StageResult coverage(const std::optional<std::filesystem::path>& graph = {},
                       const std::optional<std::filesystem::path>& tasks = {});
  StageResult replay(const std::optional<std::filesystem::path>& graph = {},
                     const std::optional<std::filesystem::path>& tasks = {},
                     const std::optional<std::string>& task_id = {});
  StageResult export_benchmark();
  std::vector<StageResult> all();

  const PipelineConfig& config() const { return config_; }
  LlmClient& client();
  CostReport costs() const;

 private:
  std::size_t site_count() const { return config_.generation.mode == TaskMode::inter ? 2 : 1; }
  std::filesystem::path graph_path(std::size_t site) const;
  std::filesystem::path index_path(std::size_t site) const;
  const CrawlConfig& crawl_config(std::size_t site) const;
  std::vector<SiteGraph> load_graphs() const;
  void save_ledger(const std::string& stage);

  PipelineConfig config_;
  std::shared_ptr<Provider> provider_;
  std::unique_ptr<LlmClient> client_;
  std::size_t ledger_mark_ = 0;
};

/// Stable key order for ledger files: entries sorted by content so parallel
/// stages write identical files for identical work.
std::vector<LedgerEntry> canonical_ledger_order(std::vector<LedgerEntry> entries);

}  // namespace forge
