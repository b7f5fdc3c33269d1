// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include "forge/audit.hpp"
#include "forge/error.hpp"
#include "forge/llm/stub.hpp"
#include "forge/qc.hpp"
#include "forge/retrieval.hpp"
#include "forge/taskgen.hpp"
#include "forge/util.hpp"
#include "support/fixture_pipeline.hpp"
#include "support/graph_build.hpp"

using namespace forge;
using forge::testing::Adjacency;
using forge::testing::TestRng;

namespace {

struct Check {
  std::vector<std::string> failures;
  std::string info;

  void expect(bool ok, const std::string& what) {
    if (!ok && failures.size() < 5) failures.push_back(what);
    if (!ok) ++failed;
  }
  std::size_t failed = 0;
};

ProviderConfig quiet() {
  ProviderConfig c;
  c.retry_backoff = std::chrono::milliseconds(0);
  return c;
}

const std::filesystem::path& fixture_run() {
  static const std::filesystem::path dir = [] {
    auto d = forge::testing::scratch_dir("acceptance_run");
    Pipeline(forge::testing::fixture_config(d)).all();
    return d;
  }();
  return dir;
}

// 1
void end_to_end(Check& c) {
  auto dir = forge::testing::scratch_dir("acceptance_e2e");
  auto t0 = std::chrono::steady_clock::now();
  Pipeline(forge::testing::fixture_config(dir)).all();
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  auto graph = load_graph(dir / "graph.jsonl");
  auto tasks = verified_from_string(read_file(dir / "verified.jsonl"));
  c.expect(graph.size() == 60, "fixture graph has " + std::to_string(graph.size()) + " nodes");
  c.expect(first_level_nodes(graph).size() == 8, "fixture graph first-level count");
  c.expect(tasks.size() >= 20, "only " + std::to_string(tasks.size()) + " verified tasks");
  for (const auto& t : tasks) {
    c.expect(t.hop_order >= 2, t.draft.id + " hop_order " + std::to_string(t.hop_order));
    c.expect(!t.gold_path.steps.empty(), t.draft.id + " empty gold path");
    c.expect(t.audit.size() == 4 || t.audit.size() == 5, t.draft.id + " audit size " + std::to_string(t.audit.size()));
  }
  c.expect(secs < 60, "wall clock " + std::to_string(secs) + " s");
  char buf[96];
  std::snprintf(buf, sizeof buf, "%zu verified tasks in %.2f s", tasks.size(), secs);
  c.info = buf;
}

// 2
void graph_oracle(Check& c) {
  TestRng rng(2025);
  std::size_t queries = 0;
  for (int trial = 0; trial < 200; ++trial) {
    auto adj = forge::testing::random_digraph(rng, 1 + rng.below(50), 0.05 + 0.25 * rng.unit());
    auto [g, id] = forge::testing::build(adj, rng);
    auto dist = forge::testing::oracle_bfs(adj, 0);
    for (std::size_t v = 0; v < adj.size(); ++v) {
      if (dist[v] < 0) {
        c.expect(id[v] < 0, "unreachable vertex inserted");
        continue;
      }
      c.expect(id[v] >= 0 && g.node(static_cast<NodeId>(id[v])).depth == dist[v],
               "trial " + std::to_string(trial) + " depth mismatch at " + std::to_string(v));
    }
    auto d = forge::testing::oracle_all_pairs(forge::testing::library_adjacency(g));
    for (NodeId a = 0; a < g.size(); ++a) {
      for (NodeId b = 0; b < g.size(); ++b) {
        ++queries;
        auto p = shortest_path(g, a, b);
        bool ok = d[a][b] < 0 ? !p : (p && static_cast<int>(p->length()) == d[a][b]);
        c.expect(ok, "trial " + std::to_string(trial) + " shortest path mismatch");
      }
    }
  }
  c.info = "200 graphs, " + std::to_string(queries) + " path queries";
}

// 3
void covering_walk(Check& c) {
  TestRng rng(4242);
  int checked = 0;
  while (checked < 100) {
    auto adj = forge::testing::random_digraph(rng, 4 + rng.below(30), 0.05 + 0.25 * rng.unit());
    auto [g, id] = forge::testing::build(adj, rng);
    if (g.size() < 4) continue;
    std::vector<NodeId> ev;
    std::vector<int> ev_int;
    std::set<NodeId> used;
    for (int want = 2 + rng.below(2); static_cast<int>(ev.size()) < want;) {
      auto v = static_cast<NodeId>(1 + rng.below(static_cast<int>(g.size()) - 1));
      if (!used.insert(v).second) continue;
      ev.push_back(v);
      ev_int.push_back(static_cast<int>(v));
    }
    int best = forge::testing::oracle_covering_walk(forge::testing::library_adjacency(g), 0, ev_int);
    auto p = gold_path(g, ev);
    bool ok = best < 0 ? !p : (p && static_cast<int>(p->length()) == best);
    c.expect(ok, "graph " + std::to_string(checked) + " gold path length differs from enumeration");
    ++checked;
  }
  c.info = "100 graphs";
}

// Nodes a pair touches: both pages plus the covering walk from the root.
TaskFootprint pair_footprint(const SiteGraph& g, NodeId a, NodeId b, const std::string& id) {
  TaskFootprint f{id, {a, b}};
  if (auto p = gold_path(g, std::vector<NodeId>{a, b}))
    for (const auto& s : p->steps) f.nodes.push_back(s.node);
  return f;
}

/// Walk from the root, each step choosing uniformly among deeper successors
/// whose parent-forest subtree is tallest; the pair is the last two nodes.
std::pair<NodeId, NodeId> depth_biased_pair(const SiteGraph& g, const std::vector<int>& height, TestRng& rng) {
  NodeId prev = g.root(), at = g.root();
  for (;;) {
    std::vector<NodeId> deeper;
    int best = -1;
    for (NodeId w : g.successors(at)) {
      if (g.node(w).depth <= g.node(at).depth) continue;
      if (height[w] > best) {
        best = height[w];
        deeper.clear();
      }
      if (height[w] == best && std::find(deeper.begin(), deeper.end(), w) == deeper.end()) deeper.push_back(w);
    }
    if (deeper.empty()) break;
    prev = at;
    at = deeper[static_cast<std::size_t>(rng.below(static_cast<int>(deeper.size())))];
  }
  return {prev, at};
}

// 4
void coverage_gap(Check& c) {
  const auto& dir = fixture_run();
  auto g = load_graph(dir / "graph.jsonl");
  auto index = load_index(dir / "index.jsonl");

  std::vector<TaskFootprint> retrieval;
  for (std::uint64_t i = 0; i < 100; ++i) {
    auto p = sample_pair(index, 10, splitmix64(1000 + i));
    retrieval.push_back(pair_footprint(g, p.seed, p.secondary, "r" + std::to_string(i)));
  }

  std::vector<int> height(g.size(), 0);
  for (NodeId v = 0; v < g.size(); ++v) {
    int h = 0;
    for (auto u = std::optional<NodeId>(v); u; u = g.node(*u).parent, ++h) height[*u] = std::max(height[*u], h);
  }
  TestRng rng(77);
  std::vector<TaskFootprint> walk;
  for (int i = 0; i < 100; ++i) {
    auto [a, b] = depth_biased_pair(g, height, rng);
    walk.push_back(pair_footprint(g, a, b, "w" + std::to_string(i)));
  }

  auto r = page_coverage(g, retrieval);
  auto w = page_coverage(g, walk);
  c.expect(r.first_level_total == 8, "expected 8 first-level sections");
  c.expect(r.rate >= 2 * w.rate, "retrieval rate below twice the walk rate");
  char buf[160];
  std::snprintf(buf, sizeof buf, "retrieval %zu/%zu = %.3f, depth-biased walk %zu/%zu = %.3f, ratio %s", r.exercised,
                r.first_level_total, r.rate, w.exercised, w.first_level_total, w.rate,
                w.rate > 0 ? std::to_string(r.rate / w.rate).substr(0, 5).c_str() : "inf");
  c.info = buf;
}

DraftTask draft_with(const std::string& query) {
  DraftTask d;
  d.id = "task-0001";
  d.query = query;
  d.answer = "42";
  d.rationale = "r";
  d.evidence = {{0, 1}, {0, 2}};
  d.gen_model = "gpt-4o";
  return d;
}

// 5
void qc_fidelity(Check& c) {
  LlmClient client(quiet(), StubProvider::from_file(forge::testing::fixture_dir() / "scripted.tbl"));
  c.expect(!check_concatenation(
                draft_with("Who is the starting pitcher for the Giants, and what is the link to the depth chart?"),
                client)
                .pass,
           "concatenated example admitted");
  c.expect(check_concatenation(draft_with("On which dates did both Ben Rice and Randy Arozarena hit home runs, and "
                                          "how many days apart were the two events?"),
                               client)
               .pass,
           "valid multi-hop example rejected");
  c.expect(!check_ambiguity(draft_with("When did the team last win a championship?"), client).pass,
           "ambiguous example admitted");
  c.expect(check_ambiguity(draft_with("When did the Lakers last win an NBA championship?"), client).pass,
           "clear example rejected");

  std::size_t replies = 0;
  for (const std::string& reply : {"Yes", "No", "yes", "YES", "Yes.", "No.", "Yes, it is", "Y", "", "No\nYes",
                                   "\"Yes\"", "Correct", "no"}) {
    LlmClient one(quiet(), std::make_shared<StubProvider>(std::vector<StubProvider::Rule>{{"^", reply, ""}}));
    auto v = check_correctness(draft_with("q"), {PageContent{}, PageContent{}}, one);
    bool admitted = v.pass;
    c.expect(admitted == (trim(reply) == "Yes"), "correctness reply '" + reply + "' handled wrongly");
    bool clean = trim(reply) == "Yes" || trim(reply) == "No";
    c.expect(clean || v.error == Errc::verifier_protocol_error, "'" + reply + "' not a protocol error");
    ++replies;
  }
  c.info = "4 labeled examples, " + std::to_string(replies) + " correctness replies";
}

std::shared_ptr<StubProvider> all_pass() {
  return std::make_shared<StubProvider>(std::vector<StubProvider::Rule>{
      {"Summarize the webpage[\\s\\S]*?Title: ([^\\n]*)\\n", "The $1 page.", ""},
      {"multi-hop web navigation tasks[\\s\\S]*?Website 1: Title: ([^\\n]*)\\n[\\s\\S]*?Website 2: Title: ([^\\n]*)\\n",
       "TASK: Starting from the $1 page, which detail also appears on the $2 page?\n"
       "RATIONALE: Both pages list it.\nANSWER: The Stridewell catalog number.",
       ""},
      {"analyzing query structure", "Valid", ""},
      {"verifying the correctness", "Yes", ""},
      {"analyzing query ambiguity", "Clear", ""},
  });
}

// 6
void cost_model(Check& c) {
  auto dir = forge::testing::scratch_dir("acceptance_cost");
  auto cfg = forge::testing::fixture_config(dir);
  cfg.provider.cache_dir = dir / "cache";
  Pipeline cold(cfg, all_pass());
  cold.all();
  auto costs = cold.costs();
  auto nodes = load_graph(dir / "graph.jsonl").size();
  c.expect(costs.verified_tasks > 0, "no verified tasks");
  c.expect(costs.chat_calls_per_verified <= 5.0, "chat calls per verified task above 5");
  const auto& ledger = cold.client().ledger();
  c.expect(ledger.calls("describe") <= nodes, "more describe calls than nodes");
  c.expect(ledger.calls("embed") <= nodes, "more embed calls than nodes");
  c.expect(ledger.wire_calls("describe") <= nodes, "more describe wire calls than nodes");

  Pipeline warm(cfg, all_pass());
  warm.describe();
  warm.index();
  warm.generate();
  auto wd = warm.client().ledger().wire_calls("describe");
  auto we = warm.client().ledger().wire_calls("embed");
  c.expect(wd == 0 && we == 0, "warm cache issued describe/embed wire calls");
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "%.3f chat calls per verified task over %zu tasks; describe %zu, embed %zu for %zu nodes; warm rerun "
                "describe/embed wire calls %zu/%zu",
                costs.chat_calls_per_verified, costs.verified_tasks, ledger.calls("describe"), ledger.calls("embed"),
                nodes, wd, we);
  c.info = buf;
}

// 7
void replay_soundness(Check& c) {
  const auto& dir = fixture_run();
  auto g = load_graph(dir / "graph.jsonl");
  auto tasks = verified_from_string(read_file(dir / "verified.jsonl"));
  c.expect(!tasks.empty(), "no verified tasks to replay");
  for (const auto& t : tasks) {
    auto a = replay({&g}, t);
    auto b = replay({&g}, t);
    c.expect(a.complete, t.draft.id + " incomplete");
    c.expect(a.to_string() == b.to_string(), t.draft.id + " replays differ");
  }
  auto cfg = forge::testing::fixture_config(dir);
  Pipeline p(cfg);
  p.replay();
  auto first = read_file(dir / "replay.jsonl");
  p.replay();
  c.expect(read_file(dir / "replay.jsonl") == first, "replay file differs between runs");

  std::size_t broken = 0;
  for (const auto& t : tasks) {
    auto mutated = g;
    mutated.remove_edge(t.gold_path.steps[0].node, t.gold_path.steps[1].node);
    try {
      replay({&mutated}, t);
      c.expect(false, t.draft.id + " replayed on a mutated graph");
    } catch (const Error& e) {
      c.expect(e.code() == Errc::broken_edge, t.draft.id + " wrong error " + e.what());
      if (e.code() == Errc::broken_edge) ++broken;
    }
  }
  c.info = std::to_string(tasks.size()) + " tasks complete and stable; " + std::to_string(broken) +
           " broken-edge on one-edge mutation";
}

std::string random_field(TestRng& rng, bool allow_empty) {
  static const std::vector<std::string> pieces{"a", "Q", "9", " ",   "\n",      "?",         ":",  "TASK",
                                               "ANS", "ö", "字", "\t", "RATIO", "ANSWER", "\"", "-"};
  std::string s;
  int n = rng.below(30) + (allow_empty ? 0 : 1);
  for (int i = 0; i < n; ++i) s += pieces[static_cast<std::size_t>(rng.below(static_cast<int>(pieces.size())))];
  for (const char* m : {"TASK:", "RATIONALE:", "ANSWER:"})
    for (auto pos = s.find(m); pos != std::string::npos; pos = s.find(m)) s.erase(pos + 1, 1);
  auto t = std::string(trim(s));
  if (t.empty() && !allow_empty) t = "x";
  return t;
}

// 8
void round_trips(Check& c) {
  const auto& dir = fixture_run();
  auto once = [&](const std::string& name, auto load, auto save) {
    auto a = load(dir / name);
    auto p1 = dir / ("rt1_" + name);
    auto p2 = dir / ("rt2_" + name);
    save(a, p1);
    save(load(p1), p2);
    c.expect(read_file(p1) == read_file(p2), name + " save-load-save differs");
    c.expect(read_file(p1) == read_file(dir / name), name + " rewrite differs from pipeline output");
  };
  once("graph.jsonl", [](const auto& p) { return load_graph(p); },
       [](const auto& g, const auto& p) { save_graph(g, p); });
  once("index.jsonl", [](const auto& p) { return load_index(p); },
       [](const auto& i, const auto& p) { save_index(i, p); });
  once("verified.jsonl", [](const auto& p) { return verified_from_string(read_file(p)); },
       [](const auto& t, const auto& p) { write_file_atomic(p, verified_to_string(t)); });
  once("drafts.jsonl", [](const auto& p) { return drafts_from_string(read_file(p)); },
       [](const auto& t, const auto& p) { write_file_atomic(p, drafts_to_string(t)); });

  TestRng rng(808);
  int done = 0;
  while (done < 1000) {
    ParsedTask t{random_field(rng, false), random_field(rng, true), random_field(rng, false)};
    if (is_placeholder(t.answer)) continue;
    bool ok = false;
    try {
      ok = parse_response(render_response(t)) == t;
    } catch (const Error&) {
    }
    c.expect(ok, "triple " + std::to_string(done) + " did not survive render/parse");
    ++done;
  }
  c.info = "graph, index, drafts, verified files; 1000 triples";
}

// 9
void hop_guard(Check& c) {
  const auto& dir = fixture_run();
  auto g = load_graph(dir / "graph.jsonl");
  GraphSet set{&g};
  TestRng rng(909);
  std::size_t rejected = 0;
  for (int i = 0; i < 100; ++i) {
    LlmClient client(quiet(), all_pass());
    DraftTask d = draft_with("Which shoe on the Running page is also featured on the Sale page?");
    d.id = "dup-" + std::to_string(i);
    auto v = static_cast<NodeId>(rng.below(static_cast<int>(g.size())));
    d.evidence.assign(static_cast<std::size_t>(2 + rng.below(3)), GraphNode{0, v});
    auto out = run_qc(
        d, set, [](const GraphNode&) { return PageContent{}; }, client);
    bool ok = out.rejection && out.rejection->stage == QcStage::hop_order && out.rejection->hop_order == 1 &&
              client.ledger().calls("verify.concatenation") + client.ledger().calls("verify.correctness") +
                      client.ledger().calls("verify.ambiguity") ==
                  0;
    c.expect(ok, d.id + " not rejected at hop order 1");
    if (ok) ++rejected;
  }
  c.info = std::to_string(rejected) + "/100 rejected with hop_order=1";
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria{
      {"end-to-end fixture run", end_to_end},
      {"graph-oracle equivalence", graph_oracle},
      {"covering-walk optimality", covering_walk},
      {"coverage gap vs depth-biased walk", coverage_gap},
      {"QC gate fidelity", qc_fidelity},
      {"cost model", cost_model},
      {"replay determinism and soundness", replay_soundness},
      {"round-trip serialization", round_trips},
      {"multi-hop order guard", hop_guard},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Check c;
    try {
      criteria[i].second(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    bool ok = c.failed == 0;
    if (!ok) ++failed;
    std::cout << (ok ? "PASS" : "FAIL") << " " << i + 1 << " " << criteria[i].first;
    if (!c.info.empty()) std::cout << ": " << c.info;
    std::cout << "\n";
    for (const auto& f : c.failures) std::cout << "    " << f << "\n";
    if (c.failed > c.failures.size()) std::cout << "    (" << c.failed - c.failures.size() << " more)\n";
  }
  return failed == 0 ? 0 : 1;
}
