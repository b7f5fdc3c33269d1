#pragma once

// Independent reference implementations used as test oracles. Nothing here
// calls into the library under test.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <queue>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace forge::testing {

using Adjacency = std::vector<std::vector<int>>;

/// Plain queue BFS from `src`; -1 marks unreachable.
inline std::vector<int> oracle_bfs(const Adjacency& adj, int src) {
  std::vector<int> dist(adj.size(), -1);
  std::queue<int> q;
  dist[src] = 0;
  q.push(src);
  while (!q.empty()) {
    int v = q.front();
    q.pop();
    for (int w : adj[v]) {
      if (dist[w] < 0) {
        dist[w] = dist[v] + 1;
        q.push(w);
      }
    }
  }
  return dist;
}

/// All-pairs distances by Floyd-Warshall, a different algorithm from BFS.
inline std::vector<std::vector<int>> oracle_all_pairs(const Adjacency& adj) {
  const int n = static_cast<int>(adj.size());
  const int inf = 1 << 20;
  std::vector<std::vector<int>> d(n, std::vector<int>(n, inf));
  for (int i = 0; i < n; ++i) {
    d[i][i] = 0;
    for (int j : adj[i]) d[i][j] = std::min(d[i][j], 1);
  }
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
  for (auto& row : d)
    for (auto& x : row)
      if (x >= inf) x = -1;
  return d;
}

/// Minimal covering walk length from `root` over every ordering of
/// `targets`, or -1 when no ordering is finite.
inline int oracle_covering_walk(const Adjacency& adj, int root, std::vector<int> targets) {
  auto d = oracle_all_pairs(adj);
  std::sort(targets.begin(), targets.end());
  targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
  int best = -1;
  do {
    int at = root, total = 0;
    bool ok = true;
    for (int t : targets) {
      if (d[at][t] < 0) {
        ok = false;
        break;
      }
      total += d[at][t];
      at = t;
    }
    if (ok && (best < 0 || total < best)) best = total;
  } while (std::next_permutation(targets.begin(), targets.end()));
  return best;
}

/// Small deterministic generator (xorshift64*), independent of the library's RNG.
class TestRng {
 public:
  explicit TestRng(std::uint64_t seed) : s_(seed ? seed : 0x9E3779B97F4A7C15ull) {}
  std::uint64_t next() {
    s_ ^= s_ >> 12;
    s_ ^= s_ << 25;
    s_ ^= s_ >> 27;
    return s_ * 2685821657736338717ull;
  }
  int below(int n) { return static_cast<int>(next() % static_cast<std::uint64_t>(n)); }
  double unit() { return static_cast<double>(next() >> 11) / 9007199254740992.0; }

 private:
  std::uint64_t s_;
};

/// Random directed graph, no self loops, edge probability `density`.
inline Adjacency random_digraph(TestRng& rng, int n, double density) {
  Adjacency adj(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && rng.unit() < density) adj[i].push_back(j);
  return adj;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// Link structure of the static fixture read straight from its files: each
/// page path -> distinct same-site targets in document order. Only the
/// forms the fixture uses are handled (root-relative paths, absolute
/// off-site URLs, fragments).
inline std::map<std::string, std::vector<std::string>> fixture_links(const std::filesystem::path& site) {
  std::map<std::string, std::vector<std::string>> out;
  std::regex href(R"re(href="([^"]*)")re");
  for (const auto& entry : std::filesystem::recursive_directory_iterator(site)) {
    if (entry.path().extension() != ".html") continue;
    std::string rel = "/" + std::filesystem::relative(entry.path(), site).generic_string();
    std::string body = slurp(entry.path());
    std::vector<std::string> targets;
    for (std::sregex_iterator it(body.begin(), body.end(), href), end; it != end; ++it) {
      std::string t = (*it)[1];
      if (t.rfind("/", 0) != 0) continue;
      if (auto h = t.find('#'); h != std::string::npos) t.resize(h);
      if (std::find(targets.begin(), targets.end(), t) == targets.end()) targets.push_back(t);
    }
    out[rel] = targets;
  }
  return out;
}

}  // namespace forge::testing
