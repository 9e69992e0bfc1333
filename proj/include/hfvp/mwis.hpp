#pragma once

// Maximum weighted independent set on the ring-like proximity graphs formed
// by candidate vanishing points along one horizon line.

#include <cstdint>
#include <numbers>
#include <vector>

#include "hfvp/error.hpp"

namespace hfvp {

/// Undirected graph with non-negative node weights and a ring coordinate
/// per node. Positions order the nodes once a neighbourhood is cut out of
/// the ring; any graph is accepted, non-ring structure only costs speed.
struct VPGraph {
  std::vector<double> weights;
  /// Position on a ring of circumference `period`.
  std::vector<double> positions;
  double period = std::numbers::pi;
  std::vector<std::vector<std::uint32_t>> adjacency;

  explicit VPGraph(std::size_t n = 0)
      : weights(n, 0.0), positions(n, 0.0), adjacency(n) {}

  std::size_t size() const { return weights.size(); }

  /// Adds the edge (a, b); self loops and duplicates are ignored.
  void add_edge(std::uint32_t a, std::uint32_t b);
  bool adjacent(std::uint32_t a, std::uint32_t b) const;

  /// Nodes at `positions`, joined when their ring distance is <= max_gap.
  static VPGraph proximity(std::vector<double> positions, std::vector<double> weights, double max_gap,
                           double period = std::numbers::pi);
};

struct MwisResult {
  /// Selected node indices, ascending.
  std::vector<std::uint32_t> nodes;
  double weight = 0.0;
  /// Some subproblem was not linear in ring order and went to branch and bound.
  bool used_fallback = false;
};

/// Exact MWIS. Conditions on each member of the closed neighbourhood of a
/// minimum-degree node being selected; removing that member's neighbourhood
/// cuts the ring, and the remaining path-like subgraph is solved by dynamic
/// programming in ring order.
MwisResult mwis_ring(const VPGraph& graph);

/// Exact MWIS by branch and bound; reference path for non-ring graphs.
MwisResult mwis_branch_and_bound(const VPGraph& graph);

}  // namespace hfvp
