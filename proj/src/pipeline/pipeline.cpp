#include "forge/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>
#include <thread>

#include "forge/error.hpp"
#include "forge/extract.hpp"
#include "forge/llm/http_provider.hpp"
#include "forge/llm/stub.hpp"
#include "forge/util.hpp"

namespace forge {

using ojson = nlohmann::ordered_json;

namespace {

// Runs fn(i) for i in [0, n) on up to `workers` threads; rethrows the first
// exception after all workers stop.
template <typename F>
void parallel_for(std::size_t n, int workers, F&& fn) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto work = [&] {
    for (;;) {
      std::size_t i = next++;
      if (i >= n) return;
      {
        std::lock_guard lock(error_mu);
        if (error) return;
      }
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> threads;
  int count = std::max(1, std::min<int>(workers, static_cast<int>(n)));
  for (int t = 0; t < count; ++t) threads.emplace_back(work);
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

void require(const std::filesystem::path& p, const std::string& what) {
  if (!std::filesystem::exists(p)) {
    throw Error(Errc::missing_artifact, what + " " + p.string() + " not found; run the earlier stage first");
  }
}

}  // namespace

std::vector<LedgerEntry> canonical_ledger_order(std::vector<LedgerEntry> entries) {
  std::stable_sort(entries.begin(), entries.end(), [](const LedgerEntry& a, const LedgerEntry& b) {
    return std::tie(a.stage, a.model, a.cached, a.input_tokens, a.output_tokens, a.note) <
           std::tie(b.stage, b.model, b.cached, b.input_tokens, b.output_tokens, b.note);
  });
  return entries;
}

// Content store

ContentStore::ContentStore(GraphSet graphs, std::vector<std::filesystem::path> snapshot_dirs, ScopeRule scope)
    : graphs_(std::move(graphs)), scope_(scope) {
  for (const auto& d : snapshot_dirs) {
    require(d / "index.jsonl", "snapshot index");
    stores_.push_back(std::make_shared<SnapshotStore>(d));
  }
}

PageContent ContentStore::get(const GraphNode& node) {
  {
    std::lock_guard lock(mu_);
    if (auto it = cache_.find(node); it != cache_.end()) return it->second;
  }
  if (node.graph >= graphs_.size() || !graphs_[node.graph]->contains(node.node)) {
    throw Error(Errc::task_references_unknown_node,
                "node " + std::to_string(node.node) + " of graph " + std::to_string(node.graph));
  }
  const auto& g = *graphs_[node.graph];
  const auto& rec = g.node(node.node);
  PageContent content;
  content.title = rec.title;
  content.language = rec.language;
  if (auto fetched = stores_.at(node.graph)->get(rec.url)) {
    if (fetched->status >= 200 && fetched->status < 300 && is_html_content_type(fetched->content_type)) {
      content = extract_structure(to_raw_page(rec.url, *fetched, g.node(g.root()).url, scope_));
    }
  }
  std::lock_guard lock(mu_);
  return cache_.emplace(node, std::move(content)).first->second;
}

ContentLookup ContentStore::lookup() {
  return [this](const GraphNode& n) { return get(n); };
}

// Pipeline

Pipeline::Pipeline(PipelineConfig config, std::shared_ptr<Provider> provider)
    : config_(std::move(config)), provider_(std::move(provider)) {
  config_.resolve_defaults();
  config_.validate();
}

LlmClient& Pipeline::client() {
  if (!client_) {
    if (!provider_) {
      if (!config_.stub_script.empty()) {
        provider_ = StubProvider::from_file(config_.stub_script);
      } else {
        provider_ = std::make_shared<HttpProvider>(config_.provider);
      }
    }
    client_ = std::make_unique<LlmClient>(config_.provider, provider_);
  }
  return *client_;
}

std::filesystem::path Pipeline::graph_path(std::size_t site) const {
  return config_.paths.at(site == 0 ? config_.paths.graph : config_.paths.graph_b);
}

std::filesystem::path Pipeline::index_path(std::size_t site) const {
  return config_.paths.at(site == 0 ? config_.paths.index : config_.paths.index_b);
}

const CrawlConfig& Pipeline::crawl_config(std::size_t site) const {
  return site == 0 ? config_.crawl : *config_.crawl_b;
}

std::vector<SiteGraph> Pipeline::load_graphs() const {
  std::vector<SiteGraph> out;
  for (std::size_t s = 0; s < site_count(); ++s) {
    require(graph_path(s), "graph file");
    out.push_back(load_graph(graph_path(s)));
  }
  return out;
}

void Pipeline::save_ledger(const std::string& stage) {
  auto all = client().ledger().entries();
  std::vector<LedgerEntry> mine(all.begin() + static_cast<std::ptrdiff_t>(std::min(ledger_mark_, all.size())), all.end());
  ledger_mark_ = all.size();
  CostLedger out;
  for (auto& e : canonical_ledger_order(std::move(mine))) out.append(std::move(e));
  auto dir = config_.paths.at(config_.paths.ledger_dir);
  std::filesystem::create_directories(dir);
  out.save(dir / (stage + ".jsonl"));
}

StageResult Pipeline::crawl() {
  std::filesystem::create_directories(config_.paths.workdir);
  std::string msg;
  for (std::size_t s = 0; s < site_count(); ++s) {
    auto result = forge::crawl(crawl_config(s));
    save_graph(result.graph, graph_path(s));
    if (!msg.empty()) msg += "; ";
    msg += std::to_string(result.graph.size()) + " nodes, " + std::to_string(result.graph.edge_count()) +
           " edges (" + result.report.summary() + ")";
  }
  return {"crawl", msg};
}

StageResult Pipeline::describe() {
  auto graphs = load_graphs();
  auto& cl = client();
  std::size_t described = 0, fallbacks = 0;
  for (std::size_t s = 0; s < graphs.size(); ++s) {
    auto& g = graphs[s];
    ContentStore contents({&g}, {crawl_config(s).snapshot_dir}, crawl_config(s).scope);
    std::vector<std::optional<Description>> out(g.size());
    parallel_for(g.size(), config_.provider.max_concurrent, [&](std::size_t i) {
      const auto& rec = g.node(static_cast<NodeId>(i));
      if (rec.has_flag(kFlagFetchFailed) || rec.has_flag(kFlagNonHtml)) return;
      auto content = contents.get({0, static_cast<NodeId>(i)});
      if (content.title.empty() && content.main_text.empty() && content.headings.empty()) return;
      out[i] = describe_page(content, cl);
    });
    for (NodeId i = 0; i < g.size(); ++i) {
      if (!out[i]) continue;
      g.set_description(i, out[i]->text);
      ++described;
      if (out[i]->fallback) {
        g.add_flag(i, kFlagFallback);
        ++fallbacks;
      }
    }
    save_graph(g, graph_path(s));
  }
  save_ledger("describe");
  return {"describe", std::to_string(described) + " descriptions (" + std::to_string(fallbacks) + " fallback)"};
}

StageResult Pipeline::index() {
  auto graphs = load_graphs();
  std::string msg;
  for (std::size_t s = 0; s < graphs.size(); ++s) {
    IndexBuildReport report;
    auto idx = build_index(graphs[s], client(), &report);
    save_index(idx, index_path(s));
    if (!msg.empty()) msg += "; ";
    msg += std::to_string(idx.size()) + " vectors of dim " + std::to_string(idx.dim) + ", " +
           std::to_string(report.excluded.size()) + " excluded";
  }
  save_ledger("index");
  return {"index", msg};
}

StageResult Pipeline::generate() {
  auto graphs = load_graphs();
  std::vector<RetrievalIndex> indices;
  for (std::size_t s = 0; s < graphs.size(); ++s) {
    require(index_path(s), "index file");
    indices.push_back(load_index(index_path(s)));
  }
  GraphSet set;
  std::vector<std::filesystem::path> snaps;
  for (std::size_t s = 0; s < graphs.size(); ++s) {
    set.push_back(&graphs[s]);
    snaps.push_back(crawl_config(s).snapshot_dir);
  }
  ContentStore contents(set, snaps, config_.crawl.scope);
  auto& cl = client();
  const auto& gen = config_.generation;
  GenerationOptions opts{gen.language_policy};

  std::vector<std::optional<DraftTask>> slots(gen.n_tasks);
  std::atomic<std::size_t> parse_failures{0};
  parallel_for(gen.n_tasks, config_.provider.max_concurrent, [&](std::size_t i) {
    std::uint64_t seed = splitmix64(gen.rng_seed + i);
    PairSample pair = gen.mode == TaskMode::inter ? sample_cross_pair(indices[0], indices[1], seed)
                                                  : sample_pair(indices[0], gen.k, seed);
    try {
      slots[i] = generate_task(pair, contents.lookup(), cl, opts);
    } catch (const Error& e) {
      if (e.code() == Errc::generation_parse_error) {
        ++parse_failures;
      } else if (e.code() == Errc::provider_error) {
        cl.note("generate", e.what());
        ++parse_failures;
      } else {
        throw;
      }
    }
  });

  std::vector<DraftTask> drafts;
  for (auto& d : slots) {
    if (d) drafts.push_back(std::move(*d));
  }
  std::sort(drafts.begin(), drafts.end(), [](const DraftTask& a, const DraftTask& b) {
    return std::tie(a.pair.rng_seed, a.pair.seed_graph, a.pair.seed, a.pair.secondary_graph, a.pair.secondary) <
           std::tie(b.pair.rng_seed, b.pair.seed_graph, b.pair.seed, b.pair.secondary_graph, b.pair.secondary);
  });
  std::size_t duplicates = 0;
  if (gen.dedupe) {
    std::set<std::string> seen;
    std::vector<DraftTask> kept;
    for (auto& d : drafts) {
      if (seen.insert(d.query).second) {
        kept.push_back(std::move(d));
      } else {
        ++duplicates;
      }
    }
    drafts = std::move(kept);
  }
  for (std::size_t i = 0; i < drafts.size(); ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "task-%04zu", i + 1);
    drafts[i].id = id;
  }
  std::filesystem::create_directories(config_.paths.workdir);
  write_file_atomic(config_.paths.at(config_.paths.drafts), drafts_to_string(drafts));
  save_ledger("generate");
  std::string msg = std::to_string(drafts.size()) + " drafts from " + std::to_string(gen.n_tasks) + " pairs, " +
                    std::to_string(parse_failures.load()) + " rejected at source";
  if (gen.dedupe) msg += ", " + std::to_string(duplicates) + " duplicates dropped";
  return {"generate", msg};
}

StageResult Pipeline::verify() {
  auto graphs = load_graphs();
  require(config_.paths.at(config_.paths.drafts), "draft file");
  auto drafts = drafts_from_string(read_file(config_.paths.at(config_.paths.drafts)));
  GraphSet set;
  std::vector<std::filesystem::path> snaps;
  for (std::size_t s = 0; s < graphs.size(); ++s) {
    set.push_back(&graphs[s]);
    snaps.push_back(crawl_config(s).snapshot_dir);
  }
  ContentStore contents(set, snaps, config_.crawl.scope);
  auto& cl = client();
  std::vector<QcOutcome> outcomes(drafts.size());
  parallel_for(drafts.size(), config_.provider.max_concurrent,
               [&](std::size_t i) { outcomes[i] = run_qc(drafts[i], set, contents.lookup(), cl, config_.qc); });

  std::string verified, rejected;
  std::size_t nv = 0;
  std::map<std::string, std::size_t> by_stage;
  for (const auto& o : outcomes) {
    if (o.verified) {
      verified += verified_to_json(*o.verified) + "\n";
      ++nv;
    } else {
      rejected += rejection_to_json(*o.rejection) + "\n";
      ++by_stage[std::string(stage_name(o.rejection->stage))];
    }
  }
  write_file_atomic(config_.paths.at(config_.paths.verified), verified);
  write_file_atomic(config_.paths.at(config_.paths.rejections), rejected);
  save_ledger("verify");
  std::string msg = std::to_string(nv) + " verified, " + std::to_string(drafts.size() - nv) + " rejected";
  for (const auto& [stage, n] : by_stage) msg += " [" + stage + " " + std::to_string(n) + "]";
  return {"verify", msg};
}

StageResult Pipeline::coverage(const std::optional<std::filesystem::path>& graph_file,
                               const std::optional<std::filesystem::path>& tasks_file) {
  auto tasks_path = tasks_file.value_or(config_.paths.at(config_.paths.verified));
  require(tasks_path, "task file");
  auto tasks = verified_from_string(read_file(tasks_path));
  std::vector<SiteGraph> graphs;
  if (graph_file) {
    require(*graph_file, "graph file");
    graphs.push_back(load_graph(*graph_file));
  } else {
    graphs = load_graphs();
  }
  std::string msg;
  ojson all = ojson::array();
  for (std::size_t s = 0; s < graphs.size(); ++s) {
    auto headline = page_coverage(graphs[s], tasks, static_cast<std::uint32_t>(s));
    auto evidence = page_coverage(graphs[s], tasks, static_cast<std::uint32_t>(s), CoverageBasis::evidence_only);
    if (!msg.empty()) msg += "\n";
    if (graphs.size() > 1) msg += "site " + std::to_string(s) + " ";
    msg += headline.summary_line() + "\n";
    msg += "evidence-only " + evidence.summary_line();
    auto j = ojson::parse(headline.to_json(graphs[s]));
    j["site"] = graphs[s].node(graphs[s].root()).url.str();
    j["evidence_only_rate"] = evidence.rate;
    all.push_back(j);
  }
  if (!graph_file && !tasks_file) write_file_atomic(config_.paths.at("coverage.json"), all.dump(2) + "\n");
  return {"coverage", msg};
}

StageResult Pipeline::replay(const std::optional<std::filesystem::path>& graph_file,
                             const std::optional<std::filesystem::path>& tasks_file,
                             const std::optional<std::string>& task_id) {
  auto tasks_path = tasks_file.value_or(config_.paths.at(config_.paths.verified));
  require(tasks_path, "task file");
  auto tasks = verified_from_string(read_file(tasks_path));
  std::vector<SiteGraph> graphs;
  if (graph_file) {
    require(*graph_file, "graph file");
    graphs.push_back(load_graph(*graph_file));
  } else {
    graphs = load_graphs();
  }
  GraphSet set;
  for (const auto& g : graphs) set.push_back(&g);
  std::string traces;
  std::size_t n = 0;
  for (const auto& t : tasks) {
    if (task_id && t.draft.id != *task_id) continue;
    traces += forge::replay(set, t).to_string() + "\n";
    ++n;
  }
  if (task_id && n == 0) throw Error(Errc::missing_artifact, "no task with id " + *task_id);
  if (!graph_file && !tasks_file && !task_id) write_file_atomic(config_.paths.at("replay.jsonl"), traces);
  return {"replay", task_id ? traces : std::to_string(n) + " traces, all complete"};
}

CostReport Pipeline::costs() const {
  CostLedger merged;
  auto dir = config_.paths.at(config_.paths.ledger_dir);
  for (const char* stage : {"describe", "index", "generate", "verify"}) {
    auto p = dir / (std::string(stage) + ".jsonl");
    if (!std::filesystem::exists(p)) continue;
    for (auto& e : CostLedger::load(p).entries()) merged.append(std::move(e));
  }
  std::size_t verified = 0;
  auto vp = config_.paths.at(config_.paths.verified);
  if (std::filesystem::exists(vp)) verified = verified_from_string(read_file(vp)).size();
  return cost_report(merged, verified, merged.calls("generate"));
}

StageResult Pipeline::export_benchmark() {
  auto graphs = load_graphs();
  require(config_.paths.at(config_.paths.verified), "verified task file");
  auto tasks = verified_from_string(read_file(config_.paths.at(config_.paths.verified)));
  std::string out;
  for (const auto& t : tasks) {
    ojson j;
    j["id"] = t.draft.id;
    j["query"] = t.draft.query;
    j["answer"] = t.draft.answer;
    j["mode"] = mode_name(t.draft.mode);
    j["language"] = t.draft.language;
    j["hop_order"] = t.hop_order;
    ojson starts = ojson::array(), evidence = ojson::array(), path = ojson::array();
    std::set<std::uint32_t> sites;
    for (const auto& s : t.gold_path.steps) {
      if (sites.insert(s.graph).second) starts.push_back(graphs.at(s.graph).node(0).url.str());
      path.push_back(graphs.at(s.graph).node(s.node).url.str());
    }
    for (const auto& e : t.draft.evidence) evidence.push_back(graphs.at(e.graph).node(e.node).url.str());
    j["start_urls"] = starts;
    j["evidence_urls"] = evidence;
    j["gold_path_urls"] = path;
    j["fixed_from"] = t.fixed_from ? ojson(*t.fixed_from) : ojson(nullptr);
    out += j.dump() + "\n";
  }
  write_file_atomic(config_.paths.at(config_.paths.benchmark), out);

  std::ostringstream s;
  s << "benchmark: " << tasks.size() << " tasks\n";
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    s << "site " << i << ": " << graphs[i].node(0).url.str() << " (" << graphs[i].size() << " pages)\n";
    s << "  " << page_coverage(graphs[i], tasks, static_cast<std::uint32_t>(i)).summary_line() << "\n";
    s << "  evidence-only "
      << page_coverage(graphs[i], tasks, static_cast<std::uint32_t>(i), CoverageBasis::evidence_only).summary_line()
      << "\n";
  }
  std::map<int, std::size_t> hops;
  std::size_t repaired = 0;
  for (const auto& t : tasks) {
    ++hops[t.hop_order];
    if (t.fixed_from) ++repaired;
  }
  for (const auto& [n, c] : hops) s << "hop order " << n << ": " << c << "\n";
  s << "ambiguity repairs: " << repaired << "\n";
  auto rp = config_.paths.at(config_.paths.rejections);
  if (std::filesystem::exists(rp)) {
    std::map<std::string, std::size_t> by_stage;
    std::istringstream in(read_file(rp));
    std::string line;
    while (std::getline(in, line)) {
      if (!trim(line).empty()) ++by_stage[ojson::parse(line).at("stage").get<std::string>()];
    }
    for (const auto& [stage, c] : by_stage) s << "rejected at " << stage << ": " << c << "\n";
  }
  s << "\n" << costs().to_text();
  write_file_atomic(config_.paths.at(config_.paths.summary), s.str());
  return {"export", std::to_string(tasks.size()) + " tasks written to " +
                        config_.paths.at(config_.paths.benchmark).string()};
}

std::vector<StageResult> Pipeline::all() {
  std::vector<StageResult> out;
  out.push_back(crawl());
  out.push_back(describe());
  out.push_back(index());
  out.push_back(generate());
  out.push_back(verify());
  out.push_back(coverage());
  out.push_back(replay());
  out.push_back(export_benchmark());
  return out;
}

}  // namespace forge
