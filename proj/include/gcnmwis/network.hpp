#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gcnmwis/graph.hpp"
#include "gcnmwis/rng.hpp"

namespace gcnmwis {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point &, const Point &) = default;
};

inline double distance(Point a, Point b) noexcept { return std::hypot(a.x - b.x, a.y - b.y); }

/// Nodes scattered in a square, links between nearby node pairs, and the
/// conflict graph whose vertices are the links.
struct WirelessNetwork {
  std::vector<Point> positions;
  double side = 0.0;
  double link_radius = 1.0;
  double interference_radius = 4.0;
  /// Endpoint pairs (a, b), a < b, in lexicographic order. Link k is vertex k
  /// of the conflict graph.
  std::vector<std::pair<NodeId, NodeId>> links;
  /// Source endpoint of the 1-hop flow carried on each link. Only a label:
  /// with per-link queues the direction does not change the dynamics.
  std::vector<NodeId> flow_source;
  Graph conflict_graph;

  std::size_t num_links() const noexcept { return links.size(); }

  /// The connectivity graph over wireless nodes.
  Graph connectivity() const { return Graph::from_edges(positions.size(), links); }
};

/// Smallest distance between an endpoint of link `a` and an endpoint of link `b`.
inline double link_distance(const WirelessNetwork &net, std::size_t a, std::size_t b) {
  const auto [a0, a1] = net.links[a];
  const auto [b0, b1] = net.links[b];
  if (a0 == b0 || a0 == b1 || a1 == b0 || a1 == b1) return 0.0;
  const auto &p = net.positions;
  return std::min({distance(p[a0], p[b0]), distance(p[a0], p[b1]), distance(p[a1], p[b0]),
                   distance(p[a1], p[b1])});
}

/// Derives links and conflict graph from fixed positions. `flow_source` may be
/// empty, in which case every flow starts at the lower endpoint.
inline WirelessNetwork make_network(std::vector<Point> positions, double side, double link_radius,
                                    double interference_radius, std::vector<NodeId> flow_source = {}) {
  if (!(link_radius > 0.0) || !(interference_radius > 0.0))
    throw ParameterError("link and interference radii must be positive");
  WirelessNetwork net;
  net.positions = std::move(positions);
  net.side = side;
  net.link_radius = link_radius;
  net.interference_radius = interference_radius;
  const auto n = static_cast<NodeId>(net.positions.size());
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = i + 1; j < n; ++j)
      if (distance(net.positions[i], net.positions[j]) < link_radius) net.links.emplace_back(i, j);

  if (flow_source.empty()) {
    for (auto [a, b] : net.links) net.flow_source.push_back(a);
  } else {
    if (flow_source.size() != net.links.size())
      throw DimensionError("flow source list does not match link count");
    net.flow_source = std::move(flow_source);
  }

  std::vector<std::pair<NodeId, NodeId>> conflicts;
  for (std::size_t a = 0; a < net.links.size(); ++a)
    for (std::size_t b = a + 1; b < net.links.size(); ++b)
      if (link_distance(net, a, b) < interference_radius)
        conflicts.emplace_back(static_cast<NodeId>(a), static_cast<NodeId>(b));
  net.conflict_graph = Graph::from_edges(net.links.size(), conflicts);
  return net;
}

/// Uniform random network in a square of the given area.
inline WirelessNetwork gen_network(std::size_t num_nodes, double area, double link_radius,
                                   double interference_radius, std::uint64_t seed) {
  if (num_nodes == 0) throw ParameterError("network needs at least one node");
  if (!(area > 0.0)) throw ParameterError("area must be positive");
  Rng rng(seed);
  const double side = std::sqrt(area);
  std::vector<Point> positions(num_nodes);
  for (auto &p : positions) {
    p.x = rng.uniform(0.0, side);
    p.y = rng.uniform(0.0, side);
  }
  WirelessNetwork net = make_network(std::move(positions), side, link_radius, interference_radius);
  for (std::size_t k = 0; k < net.links.size(); ++k)
    net.flow_source[k] = rng.bernoulli(0.5) ? net.links[k].first : net.links[k].second;
  return net;
}

} // namespace gcnmwis
