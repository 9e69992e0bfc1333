#include "hfvp/mwis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "hfvp/error.hpp"

namespace hfvp {

void VPGraph::add_edge(std::uint32_t a, std::uint32_t b) {
  if (a == b || adjacent(a, b)) return;
  adjacency.at(a).push_back(b);
  adjacency.at(b).push_back(a);
}

bool VPGraph::adjacent(std::uint32_t a, std::uint32_t b) const {
  const auto& na = adjacency.at(a);
  return std::find(na.begin(), na.end(), b) != na.end();
}

VPGraph VPGraph::proximity(std::vector<double> positions, std::vector<double> weights, double max_gap,
                           double period) {
  if (positions.size() != weights.size()) {
    throw InvalidArgument("proximity graph: positions and weights differ in length");
  }
  VPGraph g(positions.size());
  g.positions = std::move(positions);
  g.weights = std::move(weights);
  g.period = period;
  for (std::uint32_t i = 0; i < g.size(); ++i) {
    for (std::uint32_t j = i + 1; j < g.size(); ++j) {
      double d = std::fmod(std::abs(g.positions[i] - g.positions[j]), period);
      d = std::min(d, period - d);
      if (d <= max_gap) g.add_edge(i, j);
    }
  }
  return g;
}

namespace {

using Matrix = std::vector<std::vector<char>>;

Matrix adjacency_matrix(const VPGraph& g) {
  Matrix m(g.size(), std::vector<char>(g.size(), 0));
  for (std::uint32_t a = 0; a < g.size(); ++a) {
    for (auto b : g.adjacency[a]) m[a][b] = 1;
  }
  return m;
}

void check_weights(const VPGraph& g) {
  if (g.positions.size() != g.size() || g.adjacency.size() != g.size()) {
    throw InvalidArgument("VPGraph: inconsistent sizes");
  }
  for (double w : g.weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("VPGraph: weights must be finite and >= 0");
  }
}

// MWIS of the nodes in `order`, taken as a path: every node's earlier
// neighbours must be the contiguous run just before it. Returns nullopt if
// that does not hold.
std::optional<std::vector<std::uint32_t>> linear_mwis(const VPGraph& g, const Matrix& adj,
                                                      const std::vector<std::uint32_t>& order) {
  const std::size_t n = order.size();
  std::vector<std::size_t> prefix_before(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t lo = k, count = 0;
    for (std::size_t j = 0; j < k; ++j) {
      if (adj[order[j]][order[k]]) {
        lo = std::min(lo, j);
        ++count;
      }
    }
    if (count != k - lo) return std::nullopt;
    prefix_before[k] = lo;
  }

  std::vector<double> best(n + 1, 0.0);
  std::vector<char> take(n, 0);
  for (std::size_t k = 0; k < n; ++k) {
    const double with = g.weights[order[k]] + best[prefix_before[k]];
    if (with > best[k]) {
      best[k + 1] = with;
      take[k] = 1;
    } else {
      best[k + 1] = best[k];
    }
  }
  std::vector<std::uint32_t> chosen;
  for (std::size_t k = n; k > 0;) {
    if (take[k - 1]) {
      chosen.push_back(order[k - 1]);
      k = prefix_before[k - 1];
    } else {
      --k;
    }
  }
  return chosen;
}

struct BranchAndBound {
  const VPGraph& g;
  const Matrix& adj;
  double best_weight = -1.0;
  std::vector<std::uint32_t> best;
  std::vector<std::uint32_t> current;

  void run(std::vector<std::uint32_t> cands, double weight) {
    double bound = weight;
    for (auto c : cands) bound += g.weights[c];
    if (bound <= best_weight) return;
    if (cands.empty()) {
      best_weight = weight;
      best = current;
      return;
    }
    // Branch on the heaviest candidate.
    std::size_t pick = 0;
    for (std::size_t i = 1; i < cands.size(); ++i) {
      if (g.weights[cands[i]] > g.weights[cands[pick]]) pick = i;
    }
    const std::uint32_t v = cands[pick];

    std::vector<std::uint32_t> rest;
    bool has_neighbour = false;
    for (auto c : cands) {
      if (c == v) continue;
      if (adj[v][c]) {
        has_neighbour = true;
      } else {
        rest.push_back(c);
      }
    }
    current.push_back(v);
    run(rest, weight + g.weights[v]);
    current.pop_back();
    if (!has_neighbour) return;  // including v is never worse

    std::vector<std::uint32_t> without;
    without.reserve(cands.size() - 1);
    for (auto c : cands) {
      if (c != v) without.push_back(c);
    }
    run(std::move(without), weight);
  }
};

std::vector<std::uint32_t> bnb_solve(const VPGraph& g, const Matrix& adj, std::vector<std::uint32_t> nodes) {
  BranchAndBound bnb{g, adj, -1.0, {}, {}};
  bnb.run(std::move(nodes), 0.0);
  return bnb.best;
}

MwisResult finish(const VPGraph& g, std::vector<std::uint32_t> nodes, bool fallback) {
  std::sort(nodes.begin(), nodes.end());
  MwisResult r;
  r.weight = 0.0;
  for (auto v : nodes) r.weight += g.weights[v];
  r.nodes = std::move(nodes);
  r.used_fallback = fallback;
  return r;
}

}  // namespace

MwisResult mwis_branch_and_bound(const VPGraph& graph) {
  check_weights(graph);
  const Matrix adj = adjacency_matrix(graph);
  std::vector<std::uint32_t> all(graph.size());
  std::iota(all.begin(), all.end(), 0u);
  return finish(graph, bnb_solve(graph, adj, std::move(all)), true);
}

MwisResult mwis_ring(const VPGraph& graph) {
  check_weights(graph);
  const std::size_t n = graph.size();
  if (n == 0) return {};
  const Matrix adj = adjacency_matrix(graph);

  std::uint32_t pivot = 0;
  for (std::uint32_t v = 1; v < n; ++v) {
    if (graph.adjacency[v].size() < graph.adjacency[pivot].size()) pivot = v;
  }

  // Some optimum contains a member of N[pivot]: otherwise adding the pivot
  // keeps the set independent without losing weight.
  std::vector<std::uint32_t> mandatory{pivot};
  for (auto u : graph.adjacency[pivot]) mandatory.push_back(u);
  std::sort(mandatory.begin() + 1, mandatory.end());

  bool fallback = false;
  double best_weight = -1.0;
  std::vector<std::uint32_t> best;
  for (auto u : mandatory) {
    std::vector<std::uint32_t> rest;
    for (std::uint32_t v = 0; v < n; ++v) {
      if (v != u && !adj[u][v]) rest.push_back(v);
    }
    auto ring_offset = [&](std::uint32_t v) {
      double d = std::fmod(graph.positions[v] - graph.positions[u], graph.period);
      if (d < 0) d += graph.period;
      return d;
    };
    std::stable_sort(rest.begin(), rest.end(), [&](std::uint32_t a, std::uint32_t b) {
      return ring_offset(a) < ring_offset(b);
    });

    std::vector<std::uint32_t> chosen;
    if (auto linear = linear_mwis(graph, adj, rest)) {
      chosen = std::move(*linear);
    } else {
      fallback = true;
      chosen = bnb_solve(graph, adj, rest);
    }
    double weight = graph.weights[u];
    for (auto v : chosen) weight += graph.weights[v];
    if (weight > best_weight) {
      best_weight = weight;
      chosen.push_back(u);
      best = std::move(chosen);
    }
  }
  return finish(graph, std::move(best), fallback);
}

}  // namespace hfvp
