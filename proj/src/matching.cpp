#include "tarski/matching.hpp"

#include <algorithm>
#include <limits>
#include <queue>

namespace tarski {

namespace {

constexpr int kInf = std::numeric_limits<int>::max();

struct HopcroftKarp {
  const BipartiteGraph& g;
  Matching m;
  std::vector<int> dist;
  std::vector<std::size_t> next;

  explicit HopcroftKarp(const BipartiteGraph& graph) : g(graph) {
    m.mate_left.assign(g.left, -1);
    m.mate_right.assign(g.right, -1);
    dist.assign(g.left, 0);
    next.assign(g.left, 0);
  }

  bool bfs() {
    std::queue<int> q;
    bool found = false;
    for (std::size_t u = 0; u < g.left; ++u) {
      if (m.mate_left[u] < 0) {
        dist[u] = 0;
        q.push(static_cast<int>(u));
      } else {
        dist[u] = kInf;
      }
    }
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int v : g.adj[u]) {
        int w = m.mate_right[v];
        if (w < 0) {
          found = true;
        } else if (dist[w] == kInf) {
          dist[w] = dist[u] + 1;
          q.push(w);
        }
      }
    }
    return found;
  }

  bool dfs(int u) {
    for (std::size_t& i = next[u]; i < g.adj[u].size(); ++i) {
      int v = g.adj[u][i];
      int w = m.mate_right[v];
      if (w < 0 || (dist[w] == dist[u] + 1 && dfs(w))) {
        m.mate_left[u] = v;
        m.mate_right[v] = u;
        ++i;
        return true;
      }
    }
    dist[u] = kInf;
    return false;
  }

  Matching run() {
    while (bfs()) {
      std::fill(next.begin(), next.end(), 0);
      for (std::size_t u = 0; u < g.left; ++u)
        if (m.mate_left[u] < 0 && dfs(static_cast<int>(u))) ++m.size;
    }
    return m;
  }
};

}  // namespace

Matching max_matching(const BipartiteGraph& g) { return HopcroftKarp(g).run(); }

std::vector<int> hall_violator(const BipartiteGraph& g, const Matching& m) {
  std::vector<char> seen(g.left, 0);
  std::queue<int> q;
  for (std::size_t u = 0; u < g.left; ++u)
    if (m.mate_left[u] < 0) {
      seen[u] = 1;
      q.push(static_cast<int>(u));
    }
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (int v : g.adj[u]) {
      int w = m.mate_right[v];
      if (w >= 0 && !seen[w]) {
        seen[w] = 1;
        q.push(w);
      }
    }
  }
  std::vector<int> out;
  for (std::size_t u = 0; u < g.left; ++u)
    if (seen[u]) out.push_back(static_cast<int>(u));
  return out;
}

std::vector<int> neighbourhood(const BipartiteGraph& g, const std::vector<int>& left_set) {
  std::vector<char> hit(g.right, 0);
  for (int u : left_set)
    for (int v : g.adj[u]) hit[v] = 1;
  std::vector<int> out;
  for (std::size_t v = 0; v < g.right; ++v)
    if (hit[v]) out.push_back(static_cast<int>(v));
  return out;
}

}  // namespace tarski
