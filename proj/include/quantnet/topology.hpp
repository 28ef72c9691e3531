#pragma once

#include <span>
#include <utility>
#include <vector>

namespace quantnet {

using Edge = std::pair<int, int>;

// Fixed undirected communication graph. Every neighbor set N_i is sorted
// ascending and contains i itself.
class Topology {
 public:
  // Throws kInvalidEdge for out-of-range or self-loop endpoints and
  // kDisconnectedGraph when some subsystem cannot be reached.
  static Topology build(int num_subsystems, std::span<const Edge> edges);

  int num_subsystems() const { return static_cast<int>(neighbors_.size()); }
  const std::vector<int>& neighbors(int i) const { return neighbors_.at(i); }
  // Largest neighbor-set size, counting the subsystem itself.
  int degree() const { return degree_; }
  // Canonical edge list (i < j, sorted, deduplicated).
  const std::vector<Edge>& edges() const { return edges_; }

  bool adjacent(int i, int j) const;

 private:
  std::vector<std::vector<int>> neighbors_;
  std::vector<Edge> edges_;
  int degree_ = 0;
};

}  // namespace quantnet
