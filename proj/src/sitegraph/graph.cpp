#include "forge/sitegraph/graph.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

#include "forge/error.hpp"
#include "forge/util.hpp"

namespace forge {

using ojson = nlohmann::ordered_json;

bool NodeRecord::has_flag(std::string_view flag) const {
  return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

NodeId SiteGraph::add_page(const Url& url, std::optional<NodeId> discovered_from,
                           const std::vector<Url>& out_links) {
  if (discovered_from && !contains(*discovered_from)) {
    throw Error(Errc::unknown_parent, "node " + std::to_string(*discovered_from) + " does not exist");
  }
  auto existing = find(url);
  if (!existing && !discovered_from && !nodes_.empty()) {
    throw Error(Errc::unknown_parent, url.str() + " has no discovering page and the root is already set");
  }

  std::deque<NodeId> dirty;
  NodeId id;
  if (existing) {
    id = *existing;
  } else {
    id = static_cast<NodeId>(nodes_.size());
    NodeRecord rec;
    rec.url = url;
    rec.depth = discovered_from ? nodes_[*discovered_from].depth + 1 : 0;
    rec.parent = discovered_from;
    nodes_.push_back(std::move(rec));
    adj_.emplace_back();
    by_url_.emplace(url.str(), id);
  }

  auto link = [&](NodeId from, NodeId to) {
    if (from == to || has_edge(from, to)) return;
    add_edge(from, to);
    if (nodes_[from].depth + 1 < nodes_[to].depth) {
      nodes_[to].depth = nodes_[from].depth + 1;
      nodes_[to].parent = from;
      dirty.push_back(to);
    }
  };

  if (discovered_from) link(*discovered_from, id);
  if (auto it = pending_.find(url.str()); it != pending_.end()) {
    auto sources = std::move(it->second);
    pending_.erase(it);
    for (NodeId src : sources) link(src, id);
  }
  for (const auto& target : out_links) {
    if (target == url) continue;
    if (auto t = find(target)) {
      link(id, *t);
    } else {
      auto& srcs = pending_[target.str()];
      if (std::find(srcs.begin(), srcs.end(), id) == srcs.end()) srcs.push_back(id);
    }
  }
  for (NodeId v : dirty) relax_from(v);
  return id;
}

void SiteGraph::relax_from(NodeId start) {
  std::deque<NodeId> queue{start};
  while (!queue.empty()) {
    NodeId v = queue.front();
    queue.pop_front();
    for (NodeId w : adj_[v]) {
      if (nodes_[v].depth + 1 < nodes_[w].depth) {
        nodes_[w].depth = nodes_[v].depth + 1;
        nodes_[w].parent = v;
        queue.push_back(w);
      }
    }
  }
}

void SiteGraph::add_edge(NodeId from, NodeId to) { adj_[from].push_back(to); }

std::size_t SiteGraph::edge_count() const {
  std::size_t n = 0;
  for (const auto& a : adj_) n += a.size();
  return n;
}

bool SiteGraph::has_edge(NodeId from, NodeId to) const {
  if (!contains(from)) return false;
  const auto& a = adj_[from];
  return std::find(a.begin(), a.end(), to) != a.end();
}

std::optional<NodeId> SiteGraph::find(const Url& url) const {
  auto it = by_url_.find(url.str());
  if (it == by_url_.end()) return std::nullopt;
  return it->second;
}

void SiteGraph::set_content(NodeId id, std::string content_ref, std::string title, std::string language) {
  auto& n = nodes_.at(id);
  n.content_ref = std::move(content_ref);
  n.title = std::move(title);
  n.language = language.empty() ? "und" : std::move(language);
}

void SiteGraph::set_description(NodeId id, std::string description) {
  nodes_.at(id).description = std::move(description);
}

void SiteGraph::add_flag(NodeId id, const std::string& flag) {
  auto& n = nodes_.at(id);
  if (!n.has_flag(flag)) n.flags.push_back(flag);
}

bool SiteGraph::remove_edge(NodeId from, NodeId to) {
  if (!contains(from)) return false;
  auto& a = adj_[from];
  auto it = std::find(a.begin(), a.end(), to);
  if (it == a.end()) return false;
  a.erase(it);
  return true;
}

std::vector<NodeId> first_level_nodes(const SiteGraph& g) {
  std::vector<NodeId> out;
  for (NodeId i = 0; i < g.size(); ++i) {
    if (g.node(i).depth == 1) out.push_back(i);
  }
  return out;
}

std::vector<int> bfs_distances(const SiteGraph& g, NodeId from) {
  std::vector<int> dist(g.size(), -1);
  if (!g.contains(from)) return dist;
  std::deque<NodeId> queue{from};
  dist[from] = 0;
  while (!queue.empty()) {
    NodeId v = queue.front();
    queue.pop_front();
    for (NodeId w : g.successors(v)) {
      if (dist[w] < 0) {
        dist[w] = dist[v] + 1;
        queue.push_back(w);
      }
    }
  }
  return dist;
}

std::optional<Path> shortest_path(const SiteGraph& g, NodeId from, NodeId to) {
  if (!g.contains(from) || !g.contains(to)) return std::nullopt;
  // distances to `to` over reversed edges
  std::vector<std::vector<NodeId>> rev(g.size());
  for (NodeId v = 0; v < g.size(); ++v) {
    for (NodeId w : g.successors(v)) rev[w].push_back(v);
  }
  std::vector<int> dist(g.size(), -1);
  std::deque<NodeId> queue{to};
  dist[to] = 0;
  while (!queue.empty() && dist[from] < 0) {
    NodeId v = queue.front();
    queue.pop_front();
    for (NodeId u : rev[v]) {
      if (dist[u] < 0) {
        dist[u] = dist[v] + 1;
        queue.push_back(u);
      }
    }
  }
  if (dist[from] < 0) return std::nullopt;

  Path p{{from}};
  NodeId cur = from;
  while (cur != to) {
    NodeId best = 0;
    bool found = false;
    for (NodeId w : g.successors(cur)) {
      if (dist[w] == dist[cur] - 1 && (!found || w < best)) {
        best = w;
        found = true;
      }
    }
    cur = best;
    p.nodes.push_back(cur);
  }
  return p;
}

std::size_t GoldPath::length() const {
  std::size_t n = 0;
  for (std::size_t i = 1; i < steps.size(); ++i) {
    if (steps[i].graph == steps[i - 1].graph) ++n;
  }
  return n;
}

namespace {

std::optional<Path> covering_walk(const SiteGraph& g, std::vector<NodeId> targets) {
  std::sort(targets.begin(), targets.end());
  targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
  for (NodeId t : targets) {
    if (!g.contains(t)) return std::nullopt;
  }
  if (g.empty()) return std::nullopt;

  std::map<NodeId, std::vector<int>> dist;
  dist[g.root()] = bfs_distances(g, g.root());
  for (NodeId t : targets) dist.try_emplace(t, bfs_distances(g, t));

  std::optional<std::vector<NodeId>> best_order;
  long best = -1;
  auto order = targets;
  do {
    long total = 0;
    NodeId at = g.root();
    bool ok = true;
    for (NodeId t : order) {
      int d = dist[at][t];
      if (d < 0) {
        ok = false;
        break;
      }
      total += d;
      at = t;
    }
    if (ok && (best < 0 || total < best)) {
      best = total;
      best_order = order;
    }
  } while (std::next_permutation(order.begin(), order.end()));
  if (!best_order) return std::nullopt;

  Path walk{{g.root()}};
  NodeId at = g.root();
  for (NodeId t : *best_order) {
    auto leg = shortest_path(g, at, t);
    walk.nodes.insert(walk.nodes.end(), leg->nodes.begin() + 1, leg->nodes.end());
    at = t;
  }
  return walk;
}

}  // namespace

std::optional<GoldPath> gold_path(const GraphSet& graphs, const std::vector<GraphNode>& evidence) {
  if (evidence.empty()) return std::nullopt;
  std::map<std::uint32_t, std::vector<NodeId>> per_graph;
  for (const auto& e : evidence) {
    if (e.graph >= graphs.size() || graphs[e.graph] == nullptr) return std::nullopt;
    per_graph[e.graph].push_back(e.node);
  }
  GoldPath out;
  for (const auto& [gid, nodes] : per_graph) {
    auto walk = covering_walk(*graphs[gid], nodes);
    if (!walk) return std::nullopt;
    for (NodeId n : walk->nodes) out.steps.push_back({gid, n});
  }
  return out;
}

std::optional<GoldPath> gold_path(const SiteGraph& graph, const std::vector<NodeId>& evidence) {
  std::vector<GraphNode> ev;
  for (NodeId n : evidence) ev.push_back({0, n});
  return gold_path(GraphSet{&graph}, ev);
}

std::string graph_to_string(const SiteGraph& g) {
  std::string out;
  ojson header;
  header["format"] = "gta-sitegraph";
  header["version"] = kGraphFormatVersion;
  header["root"] = g.empty() ? ojson(nullptr) : ojson(g.root());
  header["node_count"] = g.size();
  out += header.dump() + "\n";
  for (NodeId i = 0; i < g.size(); ++i) {
    const auto& n = g.node(i);
    ojson j;
    j["id"] = i;
    j["url"] = n.url.str();
    j["depth"] = n.depth;
    j["parent"] = n.parent ? ojson(*n.parent) : ojson(nullptr);
    j["content_ref"] = n.content_ref;
    j["title"] = n.title;
    j["description"] = n.description;
    j["language"] = n.language;
    j["flags"] = n.flags;
    out += j.dump() + "\n";
  }
  for (NodeId i = 0; i < g.size(); ++i) {
    for (NodeId w : g.successors(i)) {
      ojson e;
      e["src"] = i;
      e["dst"] = w;
      out += e.dump() + "\n";
    }
  }
  return out;
}

SiteGraph graph_from_string(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& why) -> Error {
    return Error(Errc::corrupt_file, "graph line " + std::to_string(lineno) + ": " + why);
  };

  if (!std::getline(in, line)) throw Error(Errc::corrupt_file, "graph file is empty");
  ++lineno;
  ojson header;
  try {
    header = ojson::parse(line);
  } catch (const std::exception& e) {
    throw fail(e.what());
  }
  if (!header.is_object() || header.value("format", "") != "gta-sitegraph") throw fail("not a site graph header");
  if (!header.contains("version") || !header["version"].is_number_integer()) throw fail("missing version");
  if (header["version"].get<int>() != kGraphFormatVersion) {
    throw Error(Errc::schema_version_mismatch, "graph version " + header["version"].dump() + ", expected " +
                                                   std::to_string(kGraphFormatVersion));
  }

  SiteGraph g;
  std::size_t count = 0;
  try {
    count = header.at("node_count").get<std::size_t>();
    for (std::size_t i = 0; i < count; ++i) {
      if (!std::getline(in, line)) throw fail("expected " + std::to_string(count) + " nodes");
      ++lineno;
      auto j = ojson::parse(line);
      if (j.at("id").get<std::size_t>() != i) throw fail("node ids must be dense and ordered");
      NodeRecord n;
      auto raw = j.at("url").get<std::string>();
      n.url = canonicalize_url(raw);
      if (n.url.str() != raw) throw fail("url is not canonical");
      n.depth = j.at("depth").get<int>();
      if (!j.at("parent").is_null()) n.parent = j["parent"].get<NodeId>();
      n.content_ref = j.at("content_ref").get<std::string>();
      n.title = j.at("title").get<std::string>();
      n.description = j.at("description").get<std::string>();
      n.language = j.at("language").get<std::string>();
      if (j.contains("flags")) n.flags = j["flags"].get<std::vector<std::string>>();
      if (!g.by_url_.emplace(raw, static_cast<NodeId>(i)).second) throw fail("duplicate url " + raw);
      g.nodes_.push_back(std::move(n));
      g.adj_.emplace_back();
    }
    while (std::getline(in, line)) {
      ++lineno;
      if (trim(line).empty()) continue;
      auto j = ojson::parse(line);
      auto src = j.at("src").get<NodeId>();
      auto dst = j.at("dst").get<NodeId>();
      if (src >= count || dst >= count) throw fail("edge endpoint out of range");
      g.adj_[src].push_back(dst);
    }
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw fail(e.what());
  }

  for (NodeId i = 0; i < g.size(); ++i) {
    const auto& n = g.nodes_[i];
    bool ok = i == 0 ? (!n.parent && n.depth == 0)
                     : (n.parent && *n.parent < g.size() && n.depth == g.nodes_[*n.parent].depth + 1);
    if (!ok) throw Error(Errc::corrupt_file, "node " + std::to_string(i) + " violates the parent/depth invariant");
  }
  return g;
}

void save_graph(const SiteGraph& g, const std::filesystem::path& path) {
  write_file_atomic(path, graph_to_string(g));
}

SiteGraph load_graph(const std::filesystem::path& path) { return graph_from_string(read_file(path)); }

std::string graph_digest(const SiteGraph& g) { return sha256_hex(graph_to_string(g)); }

}  // namespace forge
