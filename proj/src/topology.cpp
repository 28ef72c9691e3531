#include "quantnet/topology.hpp"

#include <algorithm>
#include <queue>
#include <string>

#include "quantnet/error.hpp"

namespace quantnet {

Topology Topology::build(int num_subsystems, std::span<const Edge> edges) {
  if (num_subsystems < 1) {
    throw Error(ErrorCode::kInvalidArgument, "topology needs at least one subsystem");
  }
  Topology t;
  t.neighbors_.resize(num_subsystems);
  for (int i = 0; i < num_subsystems; ++i) t.neighbors_[i].push_back(i);

  for (const auto& [a, b] : edges) {
    if (a < 0 || b < 0 || a >= num_subsystems || b >= num_subsystems) {
      throw Error(ErrorCode::kInvalidEdge,
                  "edge (" + std::to_string(a) + "," + std::to_string(b) + ") out of range");
    }
    if (a == b) {
      throw Error(ErrorCode::kInvalidEdge, "self-loop on subsystem " + std::to_string(a));
    }
    t.edges_.emplace_back(std::min(a, b), std::max(a, b));
  }
  std::sort(t.edges_.begin(), t.edges_.end());
  t.edges_.erase(std::unique(t.edges_.begin(), t.edges_.end()), t.edges_.end());

  for (const auto& [a, b] : t.edges_) {
    t.neighbors_[a].push_back(b);
    t.neighbors_[b].push_back(a);
  }
  for (auto& n : t.neighbors_) {
    std::sort(n.begin(), n.end());
    t.degree_ = std::max(t.degree_, static_cast<int>(n.size()));
  }

  std::vector<bool> seen(num_subsystems, false);
  std::queue<int> frontier;
  frontier.push(0);
  seen[0] = true;
  int reached = 1;
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop();
    for (int v : t.neighbors_[u]) {
      if (!seen[v]) {
        seen[v] = true;
        ++reached;
        frontier.push(v);
      }
    }
  }
  if (reached != num_subsystems) {
    const auto missing = std::find(seen.begin(), seen.end(), false) - seen.begin();
    throw Error(ErrorCode::kDisconnectedGraph,
                "subsystem " + std::to_string(missing) + " is not reachable from subsystem 0");
  }
  return t;
}

bool Topology::adjacent(int i, int j) const {
  const auto& n = neighbors_.at(i);
  return std::binary_search(n.begin(), n.end(), j);
}

}  // namespace quantnet
