#include "forge/crawler/crawl.hpp"

#include <httplib.h>

#include <atomic>
#include <deque>
#include <future>
#include <nlohmann/json.hpp>
#include <sstream>
#include <thread>

#include "forge/error.hpp"
#include "forge/extract.hpp"
#include "forge/util.hpp"

namespace forge {

using ojson = nlohmann::ordered_json;

void CrawlConfig::validate() const {
  if (root_url.empty()) throw Error(Errc::config_error, "crawl root_url is required");
  if (max_depth < 0) throw Error(Errc::config_error, "max_depth must be >= 0");
  if (max_pages < 1) throw Error(Errc::config_error, "max_pages must be >= 1");
  if (delay_base.count() <= 0) throw Error(Errc::config_error, "per-host delay must be positive");
  if (delay_jitter.count() < 0) throw Error(Errc::config_error, "delay jitter must be >= 0");
  if (max_concurrent < 1) throw Error(Errc::config_error, "max_concurrent must be >= 1");
  if (max_retries < 0) throw Error(Errc::config_error, "max_retries must be >= 0");
  if (snapshot_dir.empty()) throw Error(Errc::config_error, "snapshot_dir is required");
}

bool in_scope(const Url& url, const Url& root, ScopeRule rule) {
  if (url.scheme() != root.scheme() && rule == ScopeRule::host) return false;
  if (rule == ScopeRule::host) return url.host() == root.host() && url.port() == root.port();
  return registrable_domain(url.host()) == registrable_domain(root.host());
}

// HTTP source

HttpPageSource::HttpPageSource(std::map<std::string, std::string> resolve, std::chrono::seconds timeout)
    : resolve_(std::move(resolve)), timeout_(timeout) {}

FetchResult HttpPageSource::fetch(const Url& url, const std::string& user_agent) {
  FetchResult out;
  out.fetched_at = utc_timestamp_now();
  std::string host(url.host());
  std::string target = url.origin();
  httplib::Headers headers{{"User-Agent", user_agent}, {"Accept", "text/html,*/*;q=0.5"}};
  if (auto it = resolve_.find(host); it != resolve_.end()) {
    target = std::string(url.scheme()) + "://" + it->second;
    headers.emplace("Host", url.port() ? host + ":" + std::to_string(url.port()) : host);
  }
  try {
    httplib::Client cli(target);
    cli.set_connection_timeout(timeout_);
    cli.set_read_timeout(timeout_);
    cli.set_follow_location(false);
    auto res = cli.Get(std::string(url.path_and_query()), headers);
    if (!res) {
      out.error = httplib::to_string(res.error());
      return out;
    }
    out.status = res->status;
    out.content_type = res->get_header_value("Content-Type");
    out.location = res->get_header_value("Location");
    out.body = std::move(res->body);
  } catch (const std::exception& e) {
    out.status = 0;
    out.error = e.what();
  }
  return out;
}

// Snapshot store

SnapshotStore::SnapshotStore(std::filesystem::path dir) : dir_(std::move(dir)) {
  auto index = dir_ / "index.jsonl";
  if (!std::filesystem::exists(index)) return;
  std::istringstream in(read_file(index));
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      auto j = ojson::parse(line);
      Entry e;
      e.url = j.at("url").get<std::string>();
      e.digest = j.at("digest").get<std::string>();
      e.status = j.at("status").get<int>();
      e.content_type = j.at("content_type").get<std::string>();
      e.fetched_at = j.at("fetched_at").get<std::string>();
      if (j.contains("location")) e.location = j["location"].get<std::string>();
      index_[e.url] = std::move(e);
    } catch (const std::exception& ex) {
      throw Error(Errc::corrupt_file, "snapshot index line " + std::to_string(lineno) + ": " + ex.what());
    }
  }
}

std::string SnapshotStore::digest_for(const Url& url) { return sha256_hex(url.str()); }

void SnapshotStore::put(const Url& url, const FetchResult& result) {
  Entry e{url.str(), digest_for(url), result.status, result.content_type, result.fetched_at, result.location};
  std::filesystem::create_directories(dir_ / "pages");
  write_file_atomic(dir_ / "pages" / e.digest, result.body);
  std::lock_guard lock(mu_);
  index_[e.url] = std::move(e);
}

std::optional<SnapshotStore::Entry> SnapshotStore::entry(const Url& url) const {
  std::lock_guard lock(mu_);
  auto it = index_.find(url.str());
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::string SnapshotStore::body(const Entry& entry) const { return read_file(dir_ / "pages" / entry.digest); }

std::optional<FetchResult> SnapshotStore::get(const Url& url) const {
  auto e = entry(url);
  if (!e) return std::nullopt;
  FetchResult r;
  r.status = e->status;
  r.content_type = e->content_type;
  r.location = e->location;
  r.fetched_at = e->fetched_at;
  r.body = body(*e);
  return r;
}

std::size_t SnapshotStore::size() const {
  std::lock_guard lock(mu_);
  return index_.size();
}

void SnapshotStore::flush() const {
  std::string out;
  {
    std::lock_guard lock(mu_);
    for (const auto& [url, e] : index_) {
      ojson j;
      j["url"] = e.url;
      j["digest"] = e.digest;
      j["status"] = e.status;
      j["content_type"] = e.content_type;
      j["fetched_at"] = e.fetched_at;
      if (!e.location.empty()) j["location"] = e.location;
      out += j.dump() + "\n";
    }
  }
  std::filesystem::create_directories(dir_);
  write_file_atomic(dir_ / "index.jsonl", out);
}

FetchResult ReplaySource::fetch(const Url& url, const std::string&) {
  if (auto r = store_->get(url)) return *r;
  FetchResult miss;
  miss.error = "not in snapshot";
  return miss;
}

// Links

std::vector<Url> extract_out_links(const Url& url, const FetchResult& result, const Url& root, ScopeRule rule) {
  std::vector<Url> out;
  std::unordered_set<Url> seen;
  auto keep = [&](std::string_view raw, const Url& base) {
    try {
      Url u = canonicalize_url(raw, base);
      if (in_scope(u, root, rule) && seen.insert(u).second) out.push_back(std::move(u));
    } catch (const Error&) {
      // unresolvable hrefs (mailto:, javascript:, garbage) are not links
    }
  };
  if (result.status >= 300 && result.status < 400) {
    if (!result.location.empty()) keep(result.location, url);
    return out;
  }
  if (result.status < 200 || result.status >= 300 || !is_html_content_type(result.content_type)) return out;
  auto scan = scan_html(result.body);
  Url base = url;
  if (scan.base_href) {
    try {
      base = canonicalize_url(*scan.base_href, url);
    } catch (const Error&) {
    }
  }
  for (const auto& h : scan.hrefs) keep(h.href, base);
  return out;
}

RawPage to_raw_page(const Url& url, const FetchResult& result, const Url& root, ScopeRule rule) {
  RawPage p;
  p.url = url;
  p.fetched_at = result.fetched_at;
  p.status = result.status;
  p.content_type = result.content_type;
  p.body = result.body;
  p.out_links = extract_out_links(url, result, root, rule);
  return p;
}

// Politeness

HostGate::HostGate(std::chrono::milliseconds base, std::chrono::milliseconds jitter, std::uint64_t seed)
    : base_(base), jitter_(jitter), start_(Clock::now()), rng_(seed) {}

void HostGate::wait(const std::string& host) {
  Clock::time_point slot;
  {
    std::lock_guard lock(mu_);
    auto now = Clock::now();
    auto it = next_.find(host);
    slot = (it == next_.end() || it->second < now) ? now : it->second;
    auto jitter = jitter_.count() > 0
                      ? std::chrono::milliseconds(static_cast<long>(uniform_below(rng_, jitter_.count() + 1)))
                      : std::chrono::milliseconds(0);
    next_[host] = slot + base_ + jitter;
  }
  std::this_thread::sleep_until(slot);
  std::lock_guard lock(mu_);
  log_[host].push_back(std::chrono::duration<double, std::milli>(Clock::now() - start_).count());
}

std::map<std::string, std::vector<double>> HostGate::log() const {
  std::lock_guard lock(mu_);
  return log_;
}

// Crawl

bool should_visit(const Url& url, int depth, const CrawlConfig& config, const RobotsRules& robots,
                  const std::unordered_set<Url>& enqueued) {
  if (!in_scope(url, config.root_url, config.scope)) return false;
  if (depth > config.max_depth) return false;
  if (enqueued.count(url)) return false;
  if (config.obey_robots && !robots.allowed(url.path_and_query())) return false;
  return true;
}

RawPage fetch_page(const Url& url, const CrawlConfig& config, PageSource& source, HostGate* gate,
                   SnapshotStore* store) {
  FetchResult result;
  for (int attempt = 0;; ++attempt) {
    if (gate && !source.offline()) gate->wait(std::string(url.host()));
    result = source.fetch(url, config.user_agent);
    if (result.status != 0 || source.offline() || attempt >= config.max_retries) break;
    std::this_thread::sleep_for(config.retry_backoff * (1 << attempt));
  }
  if (store) store->put(url, result);
  return to_raw_page(url, result, config.root_url, config.scope);
}

std::string CrawlReport::summary() const {
  std::ostringstream s;
  s << "fetched " << fetched << ", skipped " << skipped << ", failed " << failed << ", non-html " << non_html
    << ", error-status " << error_status << ", " << static_cast<long>(wall_ms) << " ms";
  return s.str();
}

namespace {

struct QueueItem {
  Url url;
  std::optional<NodeId> parent;
  int depth;
};

RobotsRules robots_from(const FetchResult& r, const std::string& user_agent) {
  if (r.status >= 200 && r.status < 300) return RobotsRules::parse(r.body, user_agent);
  if (r.status >= 400 && r.status < 500) return RobotsRules::allow_all();
  // unreachable robots.txt: assume full disallow
  return RobotsRules::parse("User-agent: *\nDisallow: /\n", user_agent);
}

}  // namespace

CrawlResult crawl(const CrawlConfig& config, std::shared_ptr<PageSource> source) {
  config.validate();
  auto started = std::chrono::steady_clock::now();

  std::shared_ptr<SnapshotStore> store;
  if (config.replay) {
    if (!std::filesystem::exists(config.snapshot_dir / "index.jsonl")) {
      throw Error(Errc::missing_artifact, "no snapshot index in " + config.snapshot_dir.string());
    }
    auto ro = std::make_shared<SnapshotStore>(config.snapshot_dir);
    source = std::make_shared<ReplaySource>(ro);
  } else {
    store = std::make_shared<SnapshotStore>(config.snapshot_dir);
    if (!source) source = std::make_shared<HttpPageSource>(config.resolve, config.timeout);
  }

  HostGate gate(config.delay_base, config.delay_jitter, splitmix64(config.rng_seed));
  std::map<std::string, RobotsRules> robots;
  auto robots_for = [&](const Url& u) -> const RobotsRules& {
    std::string origin = u.origin();
    auto it = robots.find(origin);
    if (it != robots.end()) return it->second;
    RobotsRules rules;
    if (config.obey_robots) {
      Url robots_url = canonicalize_url("/robots.txt", u);
      FetchResult r;
      for (int attempt = 0;; ++attempt) {
        if (!source->offline()) gate.wait(std::string(u.host()));
        r = source->fetch(robots_url, config.user_agent);
        if (r.status != 0 || source->offline() || attempt >= config.max_retries) break;
        std::this_thread::sleep_for(config.retry_backoff * (1 << attempt));
      }
      if (store) store->put(robots_url, r);
      rules = robots_from(r, config.user_agent);
    }
    return robots.emplace(origin, std::move(rules)).first->second;
  };

  CrawlResult out;
  CrawlReport& report = out.report;
  std::deque<QueueItem> queue;
  std::unordered_set<Url> enqueued;
  std::unordered_set<Url> skipped;

  if (config.obey_robots && !robots_for(config.root_url).allowed(config.root_url.path_and_query())) {
    throw Error(Errc::root_unreachable, config.root_url.str() + " is disallowed by robots.txt");
  }
  queue.push_back({config.root_url, std::nullopt, 0});
  enqueued.insert(config.root_url);

  std::atomic<int> in_flight{0};
  std::atomic<int> peak{0};
  while (!queue.empty() && report.fetched < static_cast<std::size_t>(config.max_pages)) {
    std::size_t budget = static_cast<std::size_t>(config.max_pages) - report.fetched;
    std::size_t width = std::min({queue.size(), budget, static_cast<std::size_t>(config.max_concurrent)});
    std::vector<QueueItem> window(queue.begin(), queue.begin() + static_cast<std::ptrdiff_t>(width));
    queue.erase(queue.begin(), queue.begin() + static_cast<std::ptrdiff_t>(width));

    std::vector<std::future<RawPage>> futures;
    for (const auto& item : window) {
      futures.push_back(std::async(std::launch::async, [&, url = item.url] {
        int now = ++in_flight;
        int prev = peak.load();
        while (now > prev && !peak.compare_exchange_weak(prev, now)) {
        }
        auto page = fetch_page(url, config, *source, &gate, store.get());
        --in_flight;
        return page;
      }));
    }
    std::vector<RawPage> pages;
    for (auto& f : futures) pages.push_back(f.get());

    for (std::size_t i = 0; i < window.size(); ++i) {
      const auto& item = window[i];
      const auto& page = pages[i];
      report.dequeued_depths.push_back(item.depth);
      ++report.fetched;
      if (!item.parent && (page.status == 0 || page.status >= 400)) {
        throw Error(Errc::root_unreachable,
                    item.url.str() + (page.status ? " returned HTTP " + std::to_string(page.status) : " did not respond"));
      }
      NodeId id = out.graph.add_page(item.url, item.parent, page.out_links);
      std::string title, language;
      if (page.status == 0) {
        ++report.failed;
        out.graph.add_flag(id, kFlagFetchFailed);
      } else if (page.status >= 400) {
        ++report.error_status;
      } else if (page.status < 300 && !is_html_content_type(page.content_type)) {
        ++report.non_html;
        out.graph.add_flag(id, kFlagNonHtml);
      } else if (page.status < 300) {
        auto content = extract_structure(page);
        title = content.title;
        language = content.language;
      }
      out.graph.set_content(id, SnapshotStore::digest_for(item.url), title, language);

      if (item.depth >= config.max_depth) {
        for (const auto& link : page.out_links) {
          if (!enqueued.count(link)) skipped.insert(link);
        }
        continue;
      }
      for (const auto& link : page.out_links) {
        if (enqueued.count(link)) continue;
        if (should_visit(link, item.depth + 1, config, robots_for(link), enqueued)) {
          enqueued.insert(link);
          skipped.erase(link);
          queue.push_back({link, id, item.depth + 1});
        } else {
          skipped.insert(link);
        }
      }
    }
  }

  if (store) store->flush();
  report.skipped = skipped.size();
  report.peak_in_flight = peak.load();
  report.request_ms = gate.log();
  report.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  return out;
}

}  // namespace forge
