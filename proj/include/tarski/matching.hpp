#pragma once

#include <cstddef>
#include <vector>

namespace tarski {

/// Bipartite graph with adjacency lists from the left side. Neighbour
/// order is respected, so results are deterministic.
struct BipartiteGraph {
  std::size_t left = 0, right = 0;
  std::vector<std::vector<int>> adj;

  explicit BipartiteGraph(std::size_t l = 0, std::size_t r = 0) : left(l), right(r), adj(l) {}
};

struct Matching {
  std::vector<int> mate_left;   // -1 when unmatched
  std::vector<int> mate_right;  // -1 when unmatched
  std::size_t size = 0;
};

/// Hopcroft-Karp maximum matching.
Matching max_matching(const BipartiteGraph& g);

/// Left vertices reachable from unmatched left vertices by alternating
/// paths. For a maximum matching that is not left-saturating this set S
/// has |N(S)| < |S|.
std::vector<int> hall_violator(const BipartiteGraph& g, const Matching& m);

/// Neighbourhood of a left vertex set, sorted.
std::vector<int> neighbourhood(const BipartiteGraph& g, const std::vector<int>& left_set);

}  // namespace tarski
