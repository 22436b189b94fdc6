#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gcnmwis/errors.hpp"

namespace gcnmwis {

using NodeId = int;

/// Per-node utilities u(v); non-negative and finite wherever they enter a solver
/// as a scoring function.
using NodeUtilities = std::vector<double>;

/// Undirected simple graph on nodes 0..n-1 with sorted adjacency lists.
/// Node IDs double as tie-breaking identification numbers: the smaller ID wins.
class Graph {
public:
  Graph() = default;

  explicit Graph(std::size_t num_nodes) : adjacency_(num_nodes) {}

  /// Builds from an edge list. Duplicate edges and either orientation are
  /// accepted; self-loops and out-of-range endpoints are rejected.
  static Graph from_edges(std::size_t num_nodes, std::span<const std::pair<NodeId, NodeId>> edges) {
    Graph g(num_nodes);
    for (auto [a, b] : edges) {
      if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= num_nodes ||
          static_cast<std::size_t>(b) >= num_nodes)
        throw ParameterError("edge (" + std::to_string(a) + ", " + std::to_string(b) +
                             ") out of range for " + std::to_string(num_nodes) + " nodes");
      if (a == b) throw ParameterError("self-loop at node " + std::to_string(a));
      g.adjacency_[a].push_back(b);
      g.adjacency_[b].push_back(a);
    }
    for (auto &nbrs : g.adjacency_) {
      std::sort(nbrs.begin(), nbrs.end());
      nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
    }
    return g;
  }

  static Graph from_edges(std::size_t num_nodes, const std::vector<std::pair<NodeId, NodeId>> &edges) {
    return from_edges(num_nodes, std::span<const std::pair<NodeId, NodeId>>(edges));
  }

  std::size_t num_nodes() const noexcept { return adjacency_.size(); }

  std::size_t num_edges() const noexcept {
    std::size_t twice = 0;
    for (const auto &nbrs : adjacency_) twice += nbrs.size();
    return twice / 2;
  }

  std::span<const NodeId> neighbors(NodeId v) const noexcept { return adjacency_[v]; }

  std::size_t degree(NodeId v) const noexcept { return adjacency_[v].size(); }

  std::size_t max_degree() const noexcept {
    std::size_t d = 0;
    for (const auto &nbrs : adjacency_) d = std::max(d, nbrs.size());
    return d;
  }

  double average_degree() const noexcept {
    return adjacency_.empty() ? 0.0 : 2.0 * static_cast<double>(num_edges()) / static_cast<double>(num_nodes());
  }

  bool has_edge(NodeId a, NodeId b) const noexcept {
    const auto &nbrs = adjacency_[a];
    return std::binary_search(nbrs.begin(), nbrs.end(), b);
  }

  /// Edges (i, j) with i < j in lexicographic order.
  std::vector<std::pair<NodeId, NodeId>> edges() const {
    std::vector<std::pair<NodeId, NodeId>> out;
    out.reserve(num_edges());
    for (std::size_t i = 0; i < adjacency_.size(); ++i)
      for (NodeId j : adjacency_[i])
        if (static_cast<NodeId>(i) < j) out.emplace_back(static_cast<NodeId>(i), j);
    return out;
  }

  /// Symmetric, loop-free, strictly increasing neighbor lists.
  bool check_invariants() const noexcept {
    const auto n = static_cast<NodeId>(adjacency_.size());
    for (NodeId i = 0; i < n; ++i) {
      const auto &nbrs = adjacency_[i];
      for (std::size_t k = 0; k < nbrs.size(); ++k) {
        const NodeId j = nbrs[k];
        if (j < 0 || j >= n || j == i) return false;
        if (k > 0 && nbrs[k - 1] >= j) return false;
        if (!has_edge(j, i)) return false;
      }
    }
    return true;
  }

  friend bool operator==(const Graph &, const Graph &) = default;

private:
  std::vector<std::vector<NodeId>> adjacency_;
};

/// Throws unless `u` has one non-negative finite entry per node.
inline void check_utilities(const Graph &g, std::span<const double> u) {
  if (u.size() != g.num_nodes())
    throw DimensionError("utility vector has " + std::to_string(u.size()) + " entries, graph has " +
                         std::to_string(g.num_nodes()) + " nodes");
  for (std::size_t i = 0; i < u.size(); ++i)
    if (!std::isfinite(u[i]) || u[i] < 0.0)
      throw NumericError("utility of node " + std::to_string(i) + " is not a non-negative finite number");
}

/// Throws unless `w` has one finite entry per node (sign unrestricted).
inline void check_weights(const Graph &g, std::span<const double> w) {
  if (w.size() != g.num_nodes())
    throw DimensionError("weight vector has " + std::to_string(w.size()) + " entries, graph has " +
                         std::to_string(g.num_nodes()) + " nodes");
  for (std::size_t i = 0; i < w.size(); ++i)
    if (!std::isfinite(w[i])) throw NumericError("weight of node " + std::to_string(i) + " is not finite");
}

/// d_v^{-1/2}, with 0 for isolated nodes.
inline std::vector<double> inv_sqrt_degrees(const Graph &g) {
  std::vector<double> out(g.num_nodes());
  for (std::size_t v = 0; v < out.size(); ++v) {
    const auto d = g.degree(static_cast<NodeId>(v));
    out[v] = d == 0 ? 0.0 : 1.0 / std::sqrt(static_cast<double>(d));
  }
  return out;
}

/// The symmetric normalized Laplacian I - D^{-1/2} A D^{-1/2} as a sparse
/// operator. Row v of the product only reads rows of v's neighbors.
class NormalizedLaplacian {
public:
  explicit NormalizedLaplacian(const Graph &g) : graph_(&g), inv_sqrt_deg_(inv_sqrt_degrees(g)) {}

  Eigen::MatrixXd apply(const Eigen::MatrixXd &x) const {
    const Graph &g = *graph_;
    if (static_cast<std::size_t>(x.rows()) != g.num_nodes())
      throw DimensionError("feature matrix has " + std::to_string(x.rows()) + " rows, graph has " +
                           std::to_string(g.num_nodes()) + " nodes");
    Eigen::MatrixXd out = x;
    for (std::size_t v = 0; v < g.num_nodes(); ++v) {
      const double sv = inv_sqrt_deg_[v];
      for (NodeId nb : g.neighbors(static_cast<NodeId>(v)))
        out.row(static_cast<Eigen::Index>(v)) -= (sv * inv_sqrt_deg_[nb]) * x.row(nb);
    }
    return out;
  }

  const Graph &graph() const noexcept { return *graph_; }

private:
  const Graph *graph_;
  std::vector<double> inv_sqrt_deg_;
};

/// Returns L X for the symmetric normalized Laplacian L of `g`.
inline Eigen::MatrixXd laplacian_apply(const Graph &g, const Eigen::MatrixXd &x) {
  return NormalizedLaplacian(g).apply(x);
}

inline Eigen::VectorXd laplacian_apply(const Graph &g, std::span<const double> x) {
  Eigen::MatrixXd m = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  return NormalizedLaplacian(g).apply(m).col(0);
}

} // namespace gcnmwis
