#pragma once

// Independent reference implementations used only by the tests: dense
// matrices, exhaustive enumeration and finite differences.

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "gcnmwis/gcn.hpp"
#include "gcnmwis/graph.hpp"
#include "gcnmwis/rng.hpp"

namespace oracle {

using gcnmwis::Graph;
using gcnmwis::NodeId;

/// I - D^{-1/2} A D^{-1/2}, materialized; isolated nodes keep a unit diagonal.
inline Eigen::MatrixXd dense_laplacian(const Graph &g) {
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (auto [i, j] : g.edges()) a(i, j) = a(j, i) = 1.0;
  Eigen::VectorXd d = a.rowwise().sum();
  Eigen::VectorXd s(n);
  for (Eigen::Index i = 0; i < n; ++i) s(i) = d(i) > 0 ? 1.0 / std::sqrt(d(i)) : 0.0;
  return Eigen::MatrixXd::Identity(n, n) - s.asDiagonal() * a * s.asDiagonal();
}

struct BruteForce {
  double value = 0.0;
  std::vector<NodeId> members;
  int optimal_count = 0; // number of subsets attaining the optimum
};

/// Enumerates all 2^n subsets (n <= 20).
inline BruteForce brute_force_mwis(const Graph &g, const std::vector<double> &u) {
  const int n = static_cast<int>(g.num_nodes());
  std::vector<std::uint32_t> nbr_mask(n, 0);
  for (auto [i, j] : g.edges()) {
    nbr_mask[i] |= 1u << j;
    nbr_mask[j] |= 1u << i;
  }
  BruteForce best;
  best.value = -1.0;
  for (std::uint32_t s = 0; s < (1u << n); ++s) {
    bool ok = true;
    double total = 0.0;
    for (int v = 0; v < n && ok; ++v)
      if (s >> v & 1u) {
        ok = (nbr_mask[v] & s) == 0;
        total += u[v];
      }
    if (!ok) continue;
    if (total > best.value) {
      best.value = total;
      best.members.clear();
      for (int v = 0; v < n; ++v)
        if (s >> v & 1u) best.members.push_back(v);
      best.optimal_count = 1;
    } else if (total == best.value) {
      ++best.optimal_count;
    }
  }
  return best;
}

/// Naive dense evaluation of the layer recursion.
inline std::vector<double> dense_gcn_forward(const gcnmwis::GcnParams &p, const Graph &g, const std::vector<double> &x0) {
  const Eigen::MatrixXd lap = dense_laplacian(g);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(x0.size()), 1);
  for (std::size_t i = 0; i < x0.size(); ++i) x(static_cast<Eigen::Index>(i), 0) = x0[i];
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    Eigen::MatrixXd h = x * p.layers[l].theta0 + lap * x * p.layers[l].theta1;
    if (l + 1 < p.layers.size())
      for (Eigen::Index r = 0; r < h.rows(); ++r)
        for (Eigen::Index c = 0; c < h.cols(); ++c)
          if (h(r, c) < 0) h(r, c) *= p.leaky_slope;
    x = h;
  }
  return std::vector<double>(x.data(), x.data() + x.rows());
}

/// Central difference of `f` with respect to entry `k` of `x`.
inline double central_difference(const std::function<double(const std::vector<double> &)> &f, std::vector<double> x,
                                 std::size_t k, double step) {
  const double orig = x[k];
  x[k] = orig + step;
  const double hi = f(x);
  x[k] = orig - step;
  const double lo = f(x);
  return (hi - lo) / (2.0 * step);
}

inline std::vector<double> random_utilities(std::size_t n, gcnmwis::Rng &rng) {
  std::vector<double> u(n);
  for (auto &v : u) v = rng.uniform();
  return u;
}

} // namespace oracle
