#include "forge/audit.hpp"

#include <algorithm>
#include <cstdio>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "forge/error.hpp"

namespace forge {

using ojson = nlohmann::ordered_json;

TaskFootprint footprint(const VerifiedTask& task, std::uint32_t graph_id, CoverageBasis basis) {
  TaskFootprint f{task.draft.id, {}};
  std::set<NodeId> seen;
  auto add = [&](const GraphNode& n) {
    if (n.graph == graph_id && seen.insert(n.node).second) f.nodes.push_back(n.node);
  };
  for (const auto& e : task.draft.evidence) add(e);
  if (basis == CoverageBasis::evidence_and_gold_path) {
    for (const auto& s : task.gold_path.steps) add(s);
  }
  return f;
}

std::optional<NodeId> first_level_ancestor(const SiteGraph& g, NodeId node) {
  if (!g.contains(node)) return std::nullopt;
  NodeId cur = node;
  while (g.node(cur).depth > 1) cur = *g.node(cur).parent;
  if (g.node(cur).depth != 1) return std::nullopt;
  return cur;
}

CoverageReport page_coverage(const SiteGraph& g, const std::vector<TaskFootprint>& tasks) {
  CoverageReport r;
  for (NodeId f : first_level_nodes(g)) r.per_node[f];
  r.first_level_total = r.per_node.size();
  for (const auto& t : tasks) {
    std::set<NodeId> hit;
    for (NodeId n : t.nodes) {
      if (!g.contains(n)) {
        throw Error(Errc::task_references_unknown_node,
                    "task " + t.task_id + " references node " + std::to_string(n));
      }
      if (auto f = first_level_ancestor(g, n)) hit.insert(*f);
    }
    for (NodeId f : hit) r.per_node[f].push_back(t.task_id);
  }
  for (const auto& [f, ids] : r.per_node) {
    if (!ids.empty()) ++r.exercised;
  }
  r.rate = r.first_level_total ? static_cast<double>(r.exercised) / static_cast<double>(r.first_level_total) : 0.0;
  return r;
}

CoverageReport page_coverage(const SiteGraph& g, const std::vector<VerifiedTask>& tasks, std::uint32_t graph_id,
                             CoverageBasis basis) {
  std::vector<TaskFootprint> fps;
  for (const auto& t : tasks) fps.push_back(footprint(t, graph_id, basis));
  return page_coverage(g, fps);
}

std::string CoverageReport::summary_line() const {
  char buf[96];
  std::snprintf(buf, sizeof buf, "coverage: %zu/%zu = %.3f", exercised, first_level_total, rate);
  return buf;
}

std::string CoverageReport::to_json(const SiteGraph& g) const {
  ojson j;
  j["first_level_total"] = first_level_total;
  j["exercised"] = exercised;
  j["rate"] = rate;
  ojson nodes = ojson::array();
  for (const auto& [id, tasks] : per_node) {
    ojson n;
    n["node"] = id;
    n["url"] = g.contains(id) ? g.node(id).url.str() : "";
    n["tasks"] = tasks;
    nodes.push_back(n);
  }
  j["per_node"] = nodes;
  return j.dump(2);
}

ReplayTrace replay(const GraphSet& graphs, const VerifiedTask& task) {
  if (task.graph_digests.size() != graphs.size()) {
    throw Error(Errc::broken_edge, "task " + task.draft.id + " was verified against " +
                                       std::to_string(task.graph_digests.size()) + " graph(s), replay has " +
                                       std::to_string(graphs.size()));
  }
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    if (graphs[i] && graph_digest(*graphs[i]) != task.graph_digests[i]) {
      throw Error(Errc::broken_edge, "graph " + std::to_string(i) + " differs from the one task " + task.draft.id +
                                         " was verified against");
    }
  }
  std::set<GraphNode> evidence(task.draft.evidence.begin(), task.draft.evidence.end());
  std::set<GraphNode> hits;
  ReplayTrace trace;
  trace.task_id = task.draft.id;
  const auto& steps = task.gold_path.steps;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto& s = steps[i];
    if (s.graph >= graphs.size() || !graphs[s.graph] || !graphs[s.graph]->contains(s.node)) {
      throw Error(Errc::broken_edge, "step " + std::to_string(i) + " names a node outside the graphs");
    }
    const auto& g = *graphs[s.graph];
    if (i == 0 || steps[i - 1].graph != s.graph) {
      if (s.node != g.root()) throw Error(Errc::broken_edge, "walk in graph " + std::to_string(s.graph) + " does not start at its root");
    } else if (!g.has_edge(steps[i - 1].node, s.node)) {
      throw Error(Errc::broken_edge, "no edge " + std::to_string(steps[i - 1].node) + " -> " + std::to_string(s.node) +
                                         " in graph " + std::to_string(s.graph));
    }
    bool hit = evidence.count(s) != 0;
    if (hit) hits.insert(s);
    trace.steps.push_back({s.graph, s.node, g.node(s.node).url.str(), hit});
  }
  if (hits.size() != evidence.size()) {
    throw Error(Errc::evidence_not_on_path, "gold path of task " + task.draft.id + " misses " +
                                                std::to_string(evidence.size() - hits.size()) + " evidence node(s)");
  }
  trace.complete = true;
  return trace;
}

std::string ReplayTrace::to_string() const {
  ojson j;
  j["task"] = task_id;
  ojson s = ojson::array();
  for (const auto& st : steps) {
    ojson e;
    e["graph"] = st.graph;
    e["node"] = st.node;
    e["url"] = st.url;
    e["evidence_hit"] = st.evidence_hit;
    s.push_back(e);
  }
  j["steps"] = s;
  j["complete"] = complete;
  return j.dump();
}

CostReport cost_report(const CostLedger& ledger, std::size_t verified_tasks, std::size_t drafts) {
  CostReport r;
  r.verified_tasks = verified_tasks;
  r.drafts = drafts;
  for (const char* s : {"describe", "embed", "generate", "verify"}) r.stages[s];
  for (const auto& e : ledger.entries()) {
    auto top = e.stage.substr(0, e.stage.find('.'));
    for (auto* sc : {&r.stages[top], &r.tags[e.stage]}) {
      if (!e.note.empty()) {
        ++sc->notes;
        continue;
      }
      ++sc->calls;
      if (e.cached) {
        ++sc->cached;
      } else {
        ++sc->wire_calls;
      }
      sc->input_tokens += e.input_tokens;
      sc->output_tokens += e.output_tokens;
      sc->cost += e.priced_cost;
    }
    r.total_cost += e.priced_cost;
  }
  if (verified_tasks > 0) {
    double chat = static_cast<double>(r.stages["generate"].calls + r.stages["verify"].calls);
    r.chat_calls_per_verified = chat / static_cast<double>(verified_tasks);
    r.rejected_per_verified =
        static_cast<double>(drafts > verified_tasks ? drafts - verified_tasks : 0) / static_cast<double>(verified_tasks);
    r.call_bound = 5.0 + 5.0 * r.rejected_per_verified;
    r.within_bound = r.chat_calls_per_verified <= r.call_bound + 1e-9;
    r.cost_per_verified = Money::from_pico(r.total_cost.pico() / static_cast<std::int64_t>(verified_tasks));
  }
  return r;
}

std::string CostReport::to_text() const {
  std::ostringstream s;
  char buf[160];
  s << "stage        calls   wire  cached  in_tokens  out_tokens  cost\n";
  for (const auto& [name, c] : stages) {
    std::snprintf(buf, sizeof buf, "%-10s %7zu %6zu %7zu %10lld %11lld  $%s\n", name.c_str(), c.calls, c.wire_calls,
                  c.cached, static_cast<long long>(c.input_tokens), static_cast<long long>(c.output_tokens),
                  c.cost.to_string().c_str());
    s << buf;
  }
  s << "total cost: $" << total_cost.to_string() << "\n";
  s << "drafts: " << drafts << ", verified: " << verified_tasks << "\n";
  std::snprintf(buf, sizeof buf, "chat calls per verified task: %.3f (bound %.3f, %s)\n", chat_calls_per_verified,
                call_bound, within_bound ? "ok" : "EXCEEDED");
  s << buf;
  s << "cost per verified task: $" << cost_per_verified.to_string() << "\n";
  return s.str();
}

}  // namespace forge
