#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "forge/crawler/robots.hpp"
#include "forge/crawler/url.hpp"
#include "forge/page.hpp"
#include "forge/sitegraph/graph.hpp"

namespace forge {

enum class ScopeRule { registrable_domain, host };

struct CrawlConfig {
  Url root_url;
  int max_depth = 3;
  int max_pages = 2000;
  std::chrono::milliseconds delay_base{1000};
  std::chrono::milliseconds delay_jitter{500};
  ScopeRule scope = ScopeRule::registrable_domain;
  std::string user_agent = "forge-crawler/0.1";
  bool obey_robots = true;
  std::filesystem::path snapshot_dir;
  bool replay = false;
  int max_concurrent = 4;
  int max_retries = 2;
  std::chrono::milliseconds retry_backoff{250};
  std::chrono::seconds timeout{20};
  /// host -> "addr:port"; connects there while keeping the URL's Host header.
  std::map<std::string, std::string> resolve;
  std::uint64_t rng_seed = 0;

  /// Throws config-error when an invariant does not hold.
  void validate() const;
};

bool in_scope(const Url& url, const Url& root, ScopeRule rule);

/// What a source returned for one request. status 0 means no response.
struct FetchResult {
  int status = 0;
  std::string content_type;
  std::string body;
  std::string location;
  std::string fetched_at;
  std::string error;
};

class PageSource {
 public:
  virtual ~PageSource() = default;
  virtual FetchResult fetch(const Url& url, const std::string& user_agent) = 0;
  /// Sources that never touch the network skip politeness delays.
  virtual bool offline() const { return false; }
};

class HttpPageSource : public PageSource {
 public:
  HttpPageSource(std::map<std::string, std::string> resolve, std::chrono::seconds timeout);
  FetchResult fetch(const Url& url, const std::string& user_agent) override;

 private:
  std::map<std::string, std::string> resolve_;
  std::chrono::seconds timeout_;
};

/// One body file per page named by the digest of its canonical URL, plus
/// index.jsonl mapping URL -> digest, status, content type, fetch time.
class SnapshotStore {
 public:
  struct Entry {
    std::string url;
    std::string digest;
    int status = 0;
    std::string content_type;
    std::string fetched_at;
    std::string location;
  };

  /// Loads an existing index when present.
  explicit SnapshotStore(std::filesystem::path dir);

  static std::string digest_for(const Url& url);

  void put(const Url& url, const FetchResult& result);
  std::optional<Entry> entry(const Url& url) const;
  /// Body bytes; throws missing-artifact when absent.
  std::string body(const Entry& entry) const;
  std::optional<FetchResult> get(const Url& url) const;
  std::size_t size() const;

  /// Rewrites index.jsonl (sorted by URL).
  void flush() const;
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  mutable std::mutex mu_;
  std::map<std::string, Entry> index_;
};

/// Serves pages from a snapshot store; unknown URLs yield status 0.
class ReplaySource : public PageSource {
 public:
  explicit ReplaySource(std::shared_ptr<const SnapshotStore> store) : store_(std::move(store)) {}
  FetchResult fetch(const Url& url, const std::string& user_agent) override;
  bool offline() const override { return true; }

 private:
  std::shared_ptr<const SnapshotStore> store_;
};

/// In-scope canonical link targets of a response, document order, deduped.
/// HTML 2xx bodies contribute their anchors, 3xx responses their Location.
std::vector<Url> extract_out_links(const Url& url, const FetchResult& result, const Url& root, ScopeRule rule);

RawPage to_raw_page(const Url& url, const FetchResult& result, const Url& root, ScopeRule rule);

/// Enforces a minimum spacing between requests to one host: the base delay
/// plus seeded uniform jitter.
class HostGate {
 public:
  HostGate(std::chrono::milliseconds base, std::chrono::milliseconds jitter, std::uint64_t seed);
  void wait(const std::string& host);
  /// Request start times per host, in milliseconds since construction.
  std::map<std::string, std::vector<double>> log() const;

 private:
  using Clock = std::chrono::steady_clock;
  std::chrono::milliseconds base_;
  std::chrono::milliseconds jitter_;
  Clock::time_point start_;
  mutable std::mutex mu_;
  std::mt19937_64 rng_;
  std::unordered_map<std::string, Clock::time_point> next_;
  std::map<std::string, std::vector<double>> log_;
};

bool should_visit(const Url& url, int depth, const CrawlConfig& config, const RobotsRules& robots,
                  const std::unordered_set<Url>& enqueued);

/// Fetches with retries on missing responses, writes the response to
/// `store` when given, and extracts out_links. Never throws for network
/// failures: those come back with status 0.
RawPage fetch_page(const Url& url, const CrawlConfig& config, PageSource& source, HostGate* gate,
                   SnapshotStore* store);

struct CrawlReport {
  std::size_t fetched = 0;
  std::size_t skipped = 0;
  std::size_t failed = 0;
  std::size_t non_html = 0;
  std::size_t error_status = 0;
  double wall_ms = 0;
  std::vector<int> dequeued_depths;
  std::map<std::string, std::vector<double>> request_ms;
  int peak_in_flight = 0;

  std::string summary() const;
};

struct CrawlResult {
  SiteGraph graph;
  CrawlReport report;
};

/// Breadth-first crawl. In replay mode pages come from snapshot_dir and
/// nothing touches the network; otherwise `source` (HTTP by default) is
/// used and every response is written to snapshot_dir.
CrawlResult crawl(const CrawlConfig& config, std::shared_ptr<PageSource> source = nullptr);

}  // namespace forge
