#include <cmath>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "gcnmwis/gcn.hpp"
#include "gcnmwis/generators.hpp"
#include "oracles.hpp"

using namespace gcnmwis;

namespace {
using Edges = std::vector<std::pair<NodeId, NodeId>>;

GcnParams random_model(std::vector<int> dims, Rng &rng) {
  return glorot_init(std::move(dims), 0.01, rng.next());
}

double max_abs_diff(const std::vector<double> &a, const std::vector<double> &b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

std::vector<double> loss_weights(std::size_t n, Rng &rng) {
  std::vector<double> c(n);
  for (auto &x : c) x = rng.uniform(-1.0, 1.0);
  return c;
}

double dot(const std::vector<double> &a, const std::vector<double> &b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}
} // namespace

TEST(GcnForward, IsolatedNodeClosedForm) {
  const Graph g(1);
  const auto z = gcn_forward(one_layer_model(0.7, 0.2), g, std::vector<double>{3.0}).z;
  ASSERT_EQ(z.size(), 1u);
  EXPECT_DOUBLE_EQ(z[0], 3.0 * 0.7 + 3.0 * 0.2);
}

TEST(GcnForward, PairHandComputed) {
  // Lap of a single edge is [[1, -1], [-1, 1]].
  const Graph g = Graph::from_edges(2, Edges{{0, 1}});
  const auto z = gcn_forward(one_layer_model(1.0, 0.5), g, std::vector<double>{1.0, 0.25}).z;
  EXPECT_DOUBLE_EQ(z[0], 1.0 + 0.5 * 0.75);
  EXPECT_DOUBLE_EQ(z[1], 0.25 - 0.5 * 0.75);
}

TEST(GcnForward, IdentityModelReturnsInput) {
  Rng rng(1);
  const Graph g = gen_er(30, 0.2, 2);
  const auto u = oracle::random_utilities(30, rng);
  EXPECT_EQ(gcn_forward(one_layer_model(1.0, 0.0), g, u).z, u);
}

TEST(GcnForward, MatchesDenseOracle) {
  Rng rng(7);
  for (int trial = 0; trial < 60; ++trial) {
    const auto n = static_cast<std::size_t>(rng.between(1, 40));
    const Graph g = trial % 2 ? gen_er(n, rng.uniform(0.0, 0.4), rng.next())
                              : gen_ba(std::max<std::size_t>(n, 2), 1 + rng.below(std::max<std::size_t>(n, 2) - 1), rng.next());
    const int layers = 1 + static_cast<int>(rng.below(3));
    std::vector<int> dims{1};
    for (int l = 1; l < layers; ++l) dims.push_back(static_cast<int>(rng.between(1, 8)));
    dims.push_back(1);
    const auto p = random_model(dims, rng);
    const auto x = oracle::random_utilities(g.num_nodes(), rng);
    ASSERT_LT(max_abs_diff(gcn_forward(p, g, x).z, oracle::dense_gcn_forward(p, g, x)), 1e-12) << "trial " << trial;
  }
}

TEST(GcnForward, OneLayerClosedFormAgrees) {
  Rng rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = static_cast<std::size_t>(rng.between(1, 60));
    const Graph g = gen_er(n, rng.uniform(0.0, 0.5), rng.next());
    const double t0 = rng.uniform(-2, 2), t1 = rng.uniform(-2, 2);
    const auto u = oracle::random_utilities(n, rng);
    ASSERT_LT(max_abs_diff(gcn_forward(one_layer_model(t0, t1), g, u).z, gcn_forward_1layer(t0, t1, g, u)), 1e-12);
  }
}

TEST(GcnForward, Locality) {
  Rng rng(21);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 40;
    const Graph g = gen_er(n, 0.06, rng.next());
    const int layers = 1 + static_cast<int>(rng.below(3));
    std::vector<int> dims{1};
    for (int l = 1; l < layers; ++l) dims.push_back(4);
    dims.push_back(1);
    const auto p = random_model(dims, rng);
    const auto u = oracle::random_utilities(n, rng);
    const auto v = static_cast<NodeId>(rng.below(n));
    // BFS hop distances from v.
    std::vector<int> hop(n, -1);
    std::vector<NodeId> frontier{v};
    hop[v] = 0;
    for (std::size_t i = 0; i < frontier.size(); ++i)
      for (NodeId w : g.neighbors(frontier[i]))
        if (hop[w] < 0) {
          hop[w] = hop[frontier[i]] + 1;
          frontier.push_back(w);
        }
    auto perturbed = u;
    for (std::size_t w = 0; w < n; ++w)
      if (hop[w] < 0 || hop[w] > layers) perturbed[w] = rng.uniform();
    EXPECT_NEAR(gcn_forward(p, g, u).z[v], gcn_forward(p, g, perturbed).z[v], 1e-12);
  }
}

TEST(GcnForward, RejectsBadInput) {
  const Graph g = Graph::from_edges(2, Edges{{0, 1}});
  EXPECT_THROW(gcn_forward(one_layer_model(1, 1), g, std::vector<double>{1.0}), DimensionError);
  EXPECT_THROW(gcn_forward(one_layer_model(1, 1), g, std::vector<double>{1.0, INFINITY}), NumericError);
  EXPECT_THROW(gcn_forward(one_layer_model(1e308, 1e308), g, std::vector<double>{1e10, 0.0}), NumericError);
}

TEST(GcnBackward, MatchesFiniteDifferences) {
  Rng rng(99);
  for (int trial = 0; trial < 60; ++trial) {
    const int layers = 1 + trial % 3;
    const auto n = static_cast<std::size_t>(rng.between(2, 20));
    const Graph g = gen_er(n, rng.uniform(0.1, 0.5), rng.next());
    std::vector<int> dims{1};
    for (int l = 1; l < layers; ++l) dims.push_back(static_cast<int>(rng.between(2, 5)));
    dims.push_back(1);
    const auto p = random_model(dims, rng);
    const auto x = oracle::random_utilities(n, rng);
    const auto c = loss_weights(n, rng); // loss = c . z
    const auto fwd = gcn_forward(p, g, x);
    const auto grads = gcn_backward(p, fwd.cache, c);

    // Flatten and perturb each parameter entry.
    std::vector<double> flat;
    for (const auto &layer : p.layers)
      for (const auto *m : {&layer.theta0, &layer.theta1}) flat.insert(flat.end(), m->data(), m->data() + m->size());
    auto unflatten = [&](const std::vector<double> &v) {
      GcnParams q = p;
      std::size_t k = 0;
      for (auto &layer : q.layers)
        for (auto *m : {&layer.theta0, &layer.theta1})
          for (Eigen::Index i = 0; i < m->size(); ++i) m->data()[i] = v[k++];
      return q;
    };
    const auto loss = [&](const std::vector<double> &v) { return dot(c, oracle::dense_gcn_forward(unflatten(v), g, x)); };
    std::size_t k = 0;
    for (const auto &layer : grads)
      for (const auto *m : {&layer.theta0, &layer.theta1})
        for (Eigen::Index i = 0; i < m->size(); ++i, ++k) {
          const double fd = oracle::central_difference(loss, flat, k, 1e-6);
          const double an = m->data()[i];
          ASSERT_LE(std::abs(an - fd), 1e-4 * std::max(1.0, std::abs(fd))) << "trial " << trial << " entry " << k;
        }
  }
}

TEST(GcnBackward, RejectsForeignCache) {
  Rng rng(3);
  const Graph g = gen_er(10, 0.3, 1);
  const auto fwd = gcn_forward(random_model({1, 4, 1}, rng), g, oracle::random_utilities(10, rng));
  EXPECT_THROW(gcn_backward(one_layer_model(1, 1), fwd.cache, std::vector<double>(10, 1.0)), ParameterError);
  EXPECT_THROW(gcn_backward(random_model({1, 4, 1}, rng), fwd.cache, std::vector<double>(3, 1.0)), DimensionError);
}

TEST(GlorotInit, ShapesBoundsAndDeterminism) {
  const auto p = glorot_init({1, 32, 32, 1}, 0.01, 5);
  EXPECT_EQ(p.num_layers(), 3);
  EXPECT_EQ(p.layers[1].theta0.rows(), 32);
  EXPECT_LE(p.layers[1].theta1.cwiseAbs().maxCoeff(), std::sqrt(6.0 / 64.0));
  EXPECT_EQ(p, glorot_init({1, 32, 32, 1}, 0.01, 5));
  EXPECT_NE(p, glorot_init({1, 32, 32, 1}, 0.01, 6));
  EXPECT_THROW(glorot_init({2, 1}, 0.01, 0), ParameterError);
  EXPECT_THROW(glorot_init({1, 0, 1}, 0.01, 0), ParameterError);
}

TEST(ModelIo, RoundTripIsLossless) {
  const auto p = glorot_init({1, 3, 1}, 0.05, 17);
  std::stringstream io;
  save_model(io, p);
  EXPECT_EQ(load_model(io), p);
}

TEST(ModelIo, RejectsBadFiles) {
  const auto bad = [](const std::string &text) {
    std::istringstream in(text);
    return load_model(in);
  };
  EXPECT_THROW(bad("not json"), ParseError);
  EXPECT_THROW(bad(R"({"format":"gcnmwis-model","version":2,"dims":[1,1],"leaky_slope":0.01,"layers":[{"theta0":[1],"theta1":[1]}]})"),
               ParseError);
  EXPECT_THROW(bad(R"({"format":"gcnmwis-model","version":1,"dims":[1,1],"leaky_slope":0.01,"layers":[{"theta0":[1,2],"theta1":[1]}]})"),
               ParseError);
  EXPECT_THROW(bad(R"({"format":"gcnmwis-model","version":1,"dims":[1,2],"leaky_slope":0.01,"layers":[{"theta0":[1,2],"theta1":[1,2]}]})"),
               ParseError);
  EXPECT_NO_THROW(bad(R"({"format":"gcnmwis-model","version":1,"dims":[1,1],"leaky_slope":0.01,"layers":[{"theta0":[1],"theta1":[0]}]})"));
}

TEST(GcnSchedule, IdentityModelReducesToGreedy) {
  Rng rng(44);
  for (int trial = 0; trial < 50; ++trial) {
    const Graph g = gen_er(40, rng.uniform(0.02, 0.3), rng.next());
    const auto u = oracle::random_utilities(40, rng);
    const auto s = gcn_schedule(one_layer_model(1.0, 0.0), g, u);
    ASSERT_EQ(s.set.members, greedy_mwis(g, u).members);
    ASSERT_EQ(s.trace.embedding_rounds, 1);
  }
}

TEST(GcnSchedule, ScoresWithOriginalUtilities) {
  // z pushes the center below the leaves; the result is scored with u.
  const Graph g = Graph::from_edges(4, Edges{{0, 1}, {0, 2}, {0, 3}});
  const std::vector<double> u{1.2, 1, 1, 1};
  EXPECT_EQ(greedy_mwis(g, u).members, std::vector<NodeId>{0});
  const auto s = gcn_schedule(one_layer_model(0.0, 1.0), g, u);
  EXPECT_EQ(s.set.members, (std::vector<NodeId>{1, 2, 3}));
  EXPECT_DOUBLE_EQ(s.set.total_utility, 3.0);
  EXPECT_TRUE(s.set.is_maximal);
  EXPECT_EQ(s.weights.size(), 4u);
  EXPECT_EQ(s.trace.total_rounds(), 1 + s.trace.state_exchange_rounds);
}

TEST(GcnSchedule, NormalizationOnlyRescalesInput) {
  Rng rng(8);
  const Graph g = gen_er(30, 0.15, 9);
  std::vector<double> u(30);
  for (auto &x : u) x = static_cast<double>(rng.between(0, 100));
  const auto x = gcn_input(u, true);
  EXPECT_DOUBLE_EQ(*std::max_element(x.begin(), x.end()), 1.0);
  EXPECT_EQ(gcn_input(std::vector<double>(5, 0.0), true), std::vector<double>(5, 0.0));
  // A one-layer model is linear in its input, so scaling does not change the set.
  const auto p = one_layer_model(0.4, 0.9);
  EXPECT_EQ(gcn_schedule(p, g, u, {true, false}).set.members, gcn_schedule(p, g, u, {false, false}).set.members);
}
