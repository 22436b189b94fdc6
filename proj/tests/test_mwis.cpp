#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "gcnmwis/generators.hpp"
#include "gcnmwis/mwis.hpp"
#include "oracles.hpp"

using namespace gcnmwis;

namespace {
using Edges = std::vector<std::pair<NodeId, NodeId>>;

Graph path(int n) {
  Edges e;
  for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return Graph::from_edges(static_cast<std::size_t>(n), e);
}

// center 0, leaves 1..3
Graph star3() { return Graph::from_edges(4, Edges{{0, 1}, {0, 2}, {0, 3}}); }

Graph cycle4() { return Graph::from_edges(4, Edges{{0, 1}, {1, 2}, {2, 3}, {0, 3}}); }
} // namespace

TEST(ExactMwis, CompleteGraphPicksHeaviestSingleton) {
  const Graph k4 = gen_er(4, 1.0, 0);
  const auto s = exact_mwis(k4, std::vector<double>{1, 2, 3, 4});
  EXPECT_EQ(s.members, std::vector<NodeId>{3});
  EXPECT_DOUBLE_EQ(s.total_utility, 4.0);
  EXPECT_TRUE(s.is_maximal);
}

TEST(ExactMwis, EdgelessGraphTakesEverything) {
  const Graph g(6);
  const std::vector<double> u{0.5, 1, 2, 0.25, 3, 1};
  const auto s = exact_mwis(g, u);
  EXPECT_EQ(s.members.size(), 6u);
  EXPECT_DOUBLE_EQ(s.total_utility, 7.75);
}

TEST(ExactMwis, StarPrefersLeaves) {
  const std::vector<double> u{2, 1, 1, 1};
  const auto bf = oracle::brute_force_mwis(star3(), u);
  EXPECT_DOUBLE_EQ(bf.value, 3.0);
  const auto s = exact_mwis(star3(), u);
  EXPECT_EQ(s.members, (std::vector<NodeId>{1, 2, 3}));
  EXPECT_DOUBLE_EQ(s.total_utility, bf.value);
  EXPECT_EQ(greedy_mwis(star3(), u).members, std::vector<NodeId>{0});
}

TEST(ExactMwis, MatchesBruteForce) {
  Rng rng(31337);
  for (int trial = 0; trial < 300; ++trial) {
    const auto n = static_cast<std::size_t>(rng.between(1, 16));
    const Graph g = trial % 3 == 0 ? gen_ba(std::max<std::size_t>(n, 2), 1 + rng.below(std::max<std::size_t>(n, 2) - 1), rng.next())
                                   : gen_er(n, rng.uniform(0.05, 0.9), rng.next());
    std::vector<double> u = oracle::random_utilities(g.num_nodes(), rng);
    if (trial % 5 == 0)
      for (auto &x : u) x = static_cast<double>(rng.between(0, 3)); // ties and zeros
    const auto bf = oracle::brute_force_mwis(g, u);
    const auto s = exact_mwis(g, u);
    ASSERT_EQ(s.total_utility, bf.value) << "trial " << trial;
    if (bf.optimal_count == 1) ASSERT_EQ(s.members, bf.members) << "trial " << trial;
  }
}

TEST(ExactMwis, BudgetExhaustionCarriesIncumbent) {
  const Graph g = gen_er(60, 0.1, 4);
  Rng rng(4);
  const auto u = oracle::random_utilities(60, rng);
  try {
    exact_mwis(g, u, SolverBudget{3, std::nullopt});
    FAIL() << "expected budget exhaustion";
  } catch (const BudgetExhausted &e) {
    EXPECT_EQ(e.incumbent(), greedy_mwis(g, u));
    EXPECT_GE(e.gap(), 0.0);
  }
}

TEST(ExactMwis, MediumGraphsCertifyQuickly) {
  for (double avg_degree : {2.0, 5.0, 10.0, 20.0}) {
    const Graph g = gen_er(100, avg_degree / 100.0, 8);
    Rng rng(9);
    const auto u = oracle::random_utilities(100, rng);
    const auto s = exact_mwis(g, u, SolverBudget{2'000'000, std::nullopt});
    EXPECT_GE(s.total_utility, greedy_mwis(g, u).total_utility);
    EXPECT_TRUE(s.is_maximal);
  }
}

TEST(GreedyMwis, PathExample) {
  const auto s = greedy_mwis(path(4), std::vector<double>{1, 3, 4, 2});
  EXPECT_EQ(s.members, (std::vector<NodeId>{0, 2}));
  EXPECT_DOUBLE_EQ(s.total_utility, 5.0);
  EXPECT_DOUBLE_EQ(oracle::brute_force_mwis(path(4), {1, 3, 4, 2}).value, 5.0);
}

TEST(GreedyMwis, StarTakesCenter) {
  const auto s = greedy_mwis(star3(), std::vector<double>{2, 1, 1, 1});
  EXPECT_EQ(s.members, std::vector<NodeId>{0});
  EXPECT_DOUBLE_EQ(s.total_utility, 2.0);
}

TEST(GreedyMwis, TiesBreakTowardSmallerId) {
  const auto s = greedy_mwis(cycle4(), std::vector<double>{1, 1, 1, 1});
  EXPECT_EQ(s.members, (std::vector<NodeId>{0, 2}));
}

TEST(LocalGreedy, DominantMiddleNode) {
  const auto r = local_greedy(path(3), std::vector<double>{1, 3, 2});
  EXPECT_EQ(r.set.members, std::vector<NodeId>{1});
  EXPECT_EQ(r.trace.state_exchange_rounds, 1);
  EXPECT_EQ(r.trace.weight_exchange_rounds, 1);
}

TEST(LocalGreedy, PathNeedsTwoDecisionRounds) {
  const auto r = local_greedy(path(4), std::vector<double>{1, 3, 4, 2});
  EXPECT_EQ(r.set.members, (std::vector<NodeId>{0, 2}));
  EXPECT_EQ(r.trace.state_exchange_rounds, 2);
  EXPECT_EQ(r.trace.decided_per_round, (std::vector<std::size_t>{3, 1}));

  const auto single = local_greedy(path(4), std::vector<double>{1, 3, 4, 2}, {.single_round = true});
  EXPECT_EQ(single.set.members, std::vector<NodeId>{2});
  EXPECT_FALSE(single.set.is_maximal);
  EXPECT_EQ(single.trace.state_exchange_rounds, 1);
}

TEST(LocalGreedy, EmptyGraph) {
  const auto r = local_greedy(Graph(0), std::vector<double>{});
  EXPECT_TRUE(r.set.members.empty());
  EXPECT_EQ(r.trace.weight_exchange_rounds, 0);
  EXPECT_EQ(r.trace.state_exchange_rounds, 0);
}

TEST(LocalGreedy, NegativeWeightsStillYieldMaximalSet) {
  const auto r = local_greedy(cycle4(), std::vector<double>{-1, -3, 2, -0.5});
  EXPECT_TRUE(r.set.is_maximal);
  EXPECT_EQ(r.set.members, (std::vector<NodeId>{0, 2}));
}

TEST(LocalGreedy, RejectsNonFiniteWeights) {
  EXPECT_THROW(local_greedy(path(2), std::vector<double>{1, std::nan("")}), NumericError);
  EXPECT_THROW(local_greedy(path(2), std::vector<double>{1}), DimensionError);
}

TEST(LocalGreedy, EqualsGreedyIncludingTies) {
  Rng rng(55);
  for (int trial = 0; trial < 500; ++trial) {
    const auto n = static_cast<std::size_t>(rng.between(1, 50));
    const Graph g = gen_er(n, rng.uniform(0.0, 0.5), rng.next());
    std::vector<double> w(n);
    for (auto &x : w) x = trial % 2 ? rng.uniform(-1.0, 1.0) : static_cast<double>(rng.between(0, 4));
    const auto lg = local_greedy(g, w);
    ASSERT_EQ(lg.set.members, greedy_mwis(g, w).members) << "trial " << trial;
    ASSERT_TRUE(lg.set.is_maximal);
    std::size_t decided = 0;
    for (auto d : lg.trace.decided_per_round) decided += d;
    ASSERT_EQ(decided, n);
    ASSERT_LE(static_cast<std::size_t>(lg.trace.state_exchange_rounds), lg.set.members.size() + 1);
  }
}

TEST(ValidateSet, EmptySet) {
  const auto s = validate_set(path(3), std::vector<NodeId>{}, std::vector<double>{1, 1, 1});
  EXPECT_DOUBLE_EQ(s.total_utility, 0.0);
  EXPECT_FALSE(s.is_maximal);
  EXPECT_TRUE(validate_set(Graph(0), std::vector<NodeId>{}, std::vector<double>{}).is_maximal);
}

TEST(ValidateSet, AdjacentPairNamesEdge) {
  try {
    validate_set(path(2), std::vector<NodeId>{1, 0}, std::vector<double>{1, 1});
    FAIL();
  } catch (const NotIndependentError &e) {
    EXPECT_EQ(e.first(), 0);
    EXPECT_EQ(e.second(), 1);
  }
  EXPECT_THROW(validate_set(path(2), std::vector<NodeId>{5}, std::vector<double>{1, 1}), ParameterError);
}

TEST(ValidateSet, ExactOutputsAreMaximal) {
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = static_cast<std::size_t>(rng.between(1, 40));
    const Graph g = gen_er(n, rng.uniform(0.02, 0.5), rng.next());
    auto u = oracle::random_utilities(n, rng);
    for (auto &x : u) x += 1e-3;
    const auto s = exact_mwis(g, u);
    const auto checked = validate_set(g, s.members, u);
    ASSERT_TRUE(checked.is_maximal) << "trial " << trial;
    ASSERT_NEAR(checked.total_utility, s.total_utility, 1e-9 * s.total_utility);
  }
}

TEST(ApproximationRatio, Basics) {
  const std::vector<double> u{2, 1, 1, 1};
  const auto opt = exact_mwis(star3(), u);
  EXPECT_DOUBLE_EQ(approximation_ratio(opt, opt), 1.0);
  EXPECT_NEAR(approximation_ratio(greedy_mwis(star3(), u), opt), 2.0 / 3.0, 1e-15);
  EXPECT_THROW(approximation_ratio(opt, IndependentSet{}), UndefinedRatioError);
  IndependentSet too_good = opt;
  too_good.total_utility = 3.1;
  EXPECT_THROW(approximation_ratio(too_good, opt), NumericError);
}

TEST(SolutionRecord, RoundTrip) {
  const auto s = greedy_mwis(path(4), std::vector<double>{1, 3, 4, 2.5});
  std::stringstream io;
  write_solution(io, s, 3);
  EXPECT_EQ(io.str(), "value 5\nset 0 2\nrounds 3\n");
  const auto rec = read_solution(io);
  EXPECT_EQ(rec.members, s.members);
  EXPECT_EQ(rec.value, s.total_utility);
  EXPECT_EQ(rec.rounds, 3);
  std::istringstream bad("value 1\nset 0 x\nrounds 1\n");
  EXPECT_THROW(read_solution(bad), ParseError);
}
