#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <boost/dynamic_bitset.hpp>

#include "gcnmwis/errors.hpp"
#include "gcnmwis/graph.hpp"

namespace gcnmwis {

/// A checked independent set together with its total utility.
struct IndependentSet {
  std::vector<NodeId> members; // sorted
  double total_utility = 0.0;
  bool is_maximal = false;

  friend bool operator==(const IndependentSet &, const IndependentSet &) = default;
};

/// Limits for the exact solver; whichever is hit first ends the search.
struct SolverBudget {
  std::uint64_t max_branch_nodes = 10'000'000;
  std::optional<std::chrono::duration<double>> time_limit = std::chrono::seconds(60);
};

/// Communication accounting for the distributed pipeline.
struct RoundTrace {
  /// Rounds in which every node broadcasts its weight (1 for a non-empty run).
  int weight_exchange_rounds = 0;
  /// Decision rounds: nodes announce joining or dropping out.
  int state_exchange_rounds = 0;
  /// Nodes that became decided in each decision round.
  std::vector<std::size_t> decided_per_round;
  /// Neighborhood exchanges spent computing the embedding (GCN layers).
  int embedding_rounds = 0;

  /// L + decision rounds; equals L + 1 in single-round mode.
  int total_rounds() const noexcept { return embedding_rounds + state_exchange_rounds; }
};

/// Raised when the exact solver runs out of budget before certifying.
class BudgetExhausted : public Error {
public:
  BudgetExhausted(IndependentSet incumbent, double upper_bound)
      : Error("exact solver budget exhausted: incumbent " + std::to_string(incumbent.total_utility) +
              " not certified, upper bound " + std::to_string(upper_bound)),
        incumbent_(std::move(incumbent)), upper_bound_(upper_bound) {}

  const IndependentSet &incumbent() const noexcept { return incumbent_; }
  double upper_bound() const noexcept { return upper_bound_; }
  double gap() const noexcept { return upper_bound_ - incumbent_.total_utility; }

private:
  IndependentSet incumbent_;
  double upper_bound_;
};

/// Checks that `nodes` is independent in `g` and scores it with `u`.
/// Throws NotIndependentError naming the first offending edge.
inline IndependentSet validate_set(const Graph &g, std::span<const NodeId> nodes, std::span<const double> u) {
  if (u.size() != g.num_nodes()) throw DimensionError("utility vector does not match graph");
  const auto n = g.num_nodes();
  std::vector<char> in(n, 0);
  IndependentSet out;
  out.members.assign(nodes.begin(), nodes.end());
  std::sort(out.members.begin(), out.members.end());
  for (std::size_t k = 0; k < out.members.size(); ++k) {
    const NodeId v = out.members[k];
    if (v < 0 || static_cast<std::size_t>(v) >= n) throw ParameterError("node " + std::to_string(v) + " out of range");
    if (k > 0 && out.members[k - 1] == v) throw ParameterError("node " + std::to_string(v) + " listed twice");
    in[v] = 1;
  }
  for (NodeId v : out.members)
    for (NodeId nb : g.neighbors(v))
      if (in[nb]) throw NotIndependentError(std::min(v, nb), std::max(v, nb));

  for (NodeId v : out.members) out.total_utility += u[v];

  out.is_maximal = true;
  for (std::size_t v = 0; v < n && out.is_maximal; ++v) {
    if (in[v]) continue;
    const auto nbrs = g.neighbors(static_cast<NodeId>(v));
    out.is_maximal = std::any_of(nbrs.begin(), nbrs.end(), [&](NodeId nb) { return in[nb] != 0; });
  }
  return out;
}

/// Strict priority order shared by both greedy variants: larger weight first,
/// then smaller node ID.
inline bool outranks(std::span<const double> w, NodeId a, NodeId b) noexcept {
  return w[a] > w[b] || (w[a] == w[b] && a < b);
}

/// Sequential greedy: take the highest-ranked remaining node, discard its
/// neighbors, repeat. Utility is scored with `w` itself.
inline IndependentSet greedy_mwis(const Graph &g, std::span<const double> w) {
  check_weights(g, w);
  std::vector<NodeId> order(g.num_nodes());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) { return outranks(w, a, b); });
  std::vector<char> blocked(g.num_nodes(), 0);
  std::vector<NodeId> members;
  for (NodeId v : order) {
    if (blocked[v]) continue;
    members.push_back(v);
    blocked[v] = 1;
    for (NodeId nb : g.neighbors(v)) blocked[nb] = 1;
  }
  return validate_set(g, members, w);
}

struct LocalGreedyOptions {
  /// Stop after the first decision round; the result may not be maximal.
  bool single_round = false;
};

struct LocalGreedyResult {
  IndependentSet set;
  RoundTrace trace;
};

/// Round-based simulation of the distributed local greedy. After one weight
/// exchange, every undecided node that outranks all of its undecided neighbors
/// joins, and its neighbors drop out; rounds repeat until all nodes are decided.
/// With the ID tie-break this selects exactly the members of greedy_mwis.
inline LocalGreedyResult local_greedy(const Graph &g, std::span<const double> w, LocalGreedyOptions options = {}) {
  check_weights(g, w);
  enum : char { kUndecided, kIn, kOut };
  const auto n = g.num_nodes();
  std::vector<char> state(n, kUndecided);
  std::vector<NodeId> undecided(n);
  std::iota(undecided.begin(), undecided.end(), 0);
  std::vector<NodeId> members;
  std::vector<NodeId> joiners;
  LocalGreedyResult result;
  result.trace.weight_exchange_rounds = n > 0 ? 1 : 0;

  while (!undecided.empty()) {
    joiners.clear();
    for (NodeId v : undecided) {
      const auto nbrs = g.neighbors(v);
      const bool wins = std::all_of(nbrs.begin(), nbrs.end(),
                                    [&](NodeId nb) { return state[nb] != kUndecided || outranks(w, v, nb); });
      if (wins) joiners.push_back(v);
    }
    std::size_t decided = 0;
    for (NodeId v : joiners) {
      state[v] = kIn;
      members.push_back(v);
      ++decided;
      for (NodeId nb : g.neighbors(v))
        if (state[nb] == kUndecided) {
          state[nb] = kOut;
          ++decided;
        }
    }
    ++result.trace.state_exchange_rounds;
    result.trace.decided_per_round.push_back(decided);
    std::erase_if(undecided, [&](NodeId v) { return state[v] != kUndecided; });
    if (options.single_round) break;
  }
  result.set = validate_set(g, members, w);
  return result;
}

namespace mwis_detail {

using Bits = boost::dynamic_bitset<std::uint64_t>;

struct OutOfBudget {};

/// Branch-and-reduce search for a maximum-weight independent set. solve()
/// answers "is the optimum on `alive` strictly above `lower`, and if so what is
/// it", which lets bounds flow into independent components.
class BranchAndReduce {
public:
  BranchAndReduce(const Graph &g, std::span<const double> w, const SolverBudget &budget)
      : w_(w), budget_(budget), start_(std::chrono::steady_clock::now()) {
    const auto n = g.num_nodes();
    adj_.assign(n, Bits(n));
    for (std::size_t v = 0; v < n; ++v)
      for (NodeId nb : g.neighbors(static_cast<NodeId>(v))) adj_[v].set(static_cast<std::size_t>(nb));
  }

  struct Outcome {
    bool found = false;
    double value = 0.0;
    std::vector<NodeId> members;
  };

  Outcome solve(Bits alive, double lower) {
    tick();
    Outcome out;
    double forced = 0.0;
    reduce(alive, out.members, forced);
    const double need = lower - forced;

    if (alive.none()) return finish(std::move(out), forced, 0.0 > need);

    auto components = split(alive);
    if (components.size() > 1) {
      std::vector<double> bound(components.size());
      double pending = 0.0;
      for (std::size_t i = 0; i < components.size(); ++i) pending += bound[i] = clique_cover_bound(components[i]);
      if (pending <= need) return {};
      double solved = 0.0;
      for (std::size_t i = 0; i < components.size(); ++i) {
        pending -= bound[i];
        auto part = solve(components[i], need - solved - pending);
        if (!part.found) return {};
        solved += part.value;
        out.members.insert(out.members.end(), part.members.begin(), part.members.end());
      }
      return finish(std::move(out), forced + solved, solved > need);
    }

    if (clique_cover_bound(alive) <= need) return {};

    const std::size_t pivot = branch_vertex(alive);
    double best_value = need;
    std::vector<NodeId> best;
    bool found = false;
    {
      Bits rest = alive - adj_[pivot];
      rest.reset(pivot);
      auto taken = solve(std::move(rest), best_value - w_[pivot]);
      if (taken.found) {
        found = true;
        best_value = w_[pivot] + taken.value;
        best = std::move(taken.members);
        best.push_back(static_cast<NodeId>(pivot));
      }
    }
    {
      Bits rest = alive;
      rest.reset(pivot);
      auto skipped = solve(std::move(rest), best_value);
      if (skipped.found) {
        found = true;
        best_value = skipped.value;
        best = std::move(skipped.members);
      }
    }
    if (!found) return {};
    out.members.insert(out.members.end(), best.begin(), best.end());
    return finish(std::move(out), forced + best_value, true);
  }

  /// Weighted clique cover bound: every clique contributes its heaviest vertex.
  double clique_cover_bound(const Bits &alive) const {
    std::vector<std::size_t> order;
    for (auto v = alive.find_first(); v != Bits::npos; v = alive.find_next(v)) order.push_back(v);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return w_[a] > w_[b] || (w_[a] == w_[b] && a < b);
    });
    std::vector<Bits> candidates;
    double bound = 0.0;
    for (std::size_t v : order) {
      if (w_[v] <= 0.0) break;
      bool placed = false;
      for (auto &cand : candidates) {
        if (cand.test(v)) {
          cand &= adj_[v];
          placed = true;
          break;
        }
      }
      if (!placed) {
        candidates.push_back(adj_[v] & alive);
        bound += w_[v];
      }
    }
    return bound;
  }

  std::uint64_t branch_nodes() const noexcept { return nodes_; }

private:
  static Outcome finish(Outcome out, double value, bool above) {
    if (!above) return {};
    out.found = true;
    out.value = value;
    return out;
  }

  void tick() {
    ++nodes_;
    if (nodes_ > budget_.max_branch_nodes) throw OutOfBudget{};
    if (budget_.time_limit && (nodes_ & 1023) == 0 &&
        std::chrono::steady_clock::now() - start_ > *budget_.time_limit)
      throw OutOfBudget{};
  }

  /// Exhaustively applies: drop non-positive vertices; take a vertex whose
  /// weight covers its whole neighborhood; take a simplicial vertex that is
  /// heaviest in its closed neighborhood.
  void reduce(Bits &alive, std::vector<NodeId> &taken, double &forced) const {
    bool changed = true;
    while (changed) {
      changed = false;
      for (auto v = alive.find_first(); v != Bits::npos; v = alive.find_next(v)) {
        if (w_[v] <= 0.0) {
          alive.reset(v);
          changed = true;
          continue;
        }
        const Bits nb = adj_[v] & alive;
        double nb_sum = 0.0;
        double nb_max = 0.0;
        bool clique = true;
        for (auto u = nb.find_first(); u != Bits::npos; u = nb.find_next(u)) {
          nb_sum += std::max(0.0, w_[u]);
          nb_max = std::max(nb_max, w_[u]);
          if (clique) {
            Bits others = nb;
            others.reset(u);
            clique = others.is_subset_of(adj_[u]);
          }
        }
        if (w_[v] >= nb_sum || (clique && w_[v] >= nb_max)) {
          taken.push_back(static_cast<NodeId>(v));
          forced += w_[v];
          alive -= nb;
          alive.reset(v);
          changed = true;
        }
      }
    }
  }

  std::vector<Bits> split(const Bits &alive) const {
    std::vector<Bits> parts;
    Bits left = alive;
    std::vector<std::size_t> stack;
    while (left.any()) {
      Bits comp(alive.size());
      const auto seed = left.find_first();
      stack.assign(1, seed);
      comp.set(seed);
      left.reset(seed);
      while (!stack.empty()) {
        const auto v = stack.back();
        stack.pop_back();
        const Bits next = adj_[v] & left;
        for (auto u = next.find_first(); u != Bits::npos; u = next.find_next(u)) {
          comp.set(u);
          stack.push_back(u);
        }
        left -= next;
      }
      parts.push_back(std::move(comp));
    }
    return parts;
  }

  /// Highest remaining degree; ties go to the better weight-to-degree ratio,
  /// then to the smaller ID.
  std::size_t branch_vertex(const Bits &alive) const {
    std::size_t best = Bits::npos;
    std::size_t best_deg = 0;
    for (auto v = alive.find_first(); v != Bits::npos; v = alive.find_next(v)) {
      const auto d = (adj_[v] & alive).count();
      if (best == Bits::npos || d > best_deg || (d == best_deg && w_[v] > w_[best])) {
        best = v;
        best_deg = d;
      }
    }
    return best;
  }

  std::span<const double> w_;
  SolverBudget budget_;
  std::chrono::steady_clock::time_point start_;
  std::vector<Bits> adj_;
  std::uint64_t nodes_ = 0;
};

} // namespace mwis_detail

/// Certified maximum-weight independent set. Throws BudgetExhausted, carrying
/// the greedy incumbent and the root upper bound, if the budget runs out.
inline IndependentSet exact_mwis(const Graph &g, std::span<const double> u, const SolverBudget &budget = {}) {
  check_utilities(g, u);
  if (budget.max_branch_nodes == 0) throw ParameterError("solver budget must allow at least one branch node");
  const IndependentSet incumbent = greedy_mwis(g, u);
  mwis_detail::BranchAndReduce search(g, u, budget);
  mwis_detail::Bits all(g.num_nodes());
  all.set();
  try {
    auto outcome = search.solve(all, incumbent.total_utility);
    if (!outcome.found || outcome.value <= incumbent.total_utility) return incumbent;
    return validate_set(g, outcome.members, u);
  } catch (const mwis_detail::OutOfBudget &) {
    throw BudgetExhausted(incumbent, search.clique_cover_bound(all));
  }
}

/// candidate / optimal utility. Values above 1 + 1e-9 indicate a broken oracle
/// and raise; values within that slack are clamped to 1.
inline double approximation_ratio(const IndependentSet &candidate, const IndependentSet &optimal) {
  if (!(optimal.total_utility > 0.0)) throw UndefinedRatioError("approximation ratio undefined: optimal utility is zero");
  const double r = candidate.total_utility / optimal.total_utility;
  if (r > 1.0 + 1e-9)
    throw NumericError("candidate utility exceeds the optimum (ratio " + std::to_string(r) + "): oracle is not optimal");
  return std::min(r, 1.0);
}

/// Text record: `value <v>`, `set <ids...>`, `rounds <k>`.
inline void write_solution(std::ostream &out, const IndependentSet &s, int rounds) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, s.total_utility);
  out << "value " << std::string_view(buf, static_cast<std::size_t>(ptr - buf)) << "\nset";
  for (NodeId v : s.members) out << ' ' << v;
  out << "\nrounds " << rounds << '\n';
}

struct SolutionRecord {
  double value = 0.0;
  std::vector<NodeId> members;
  int rounds = 0;
};

inline SolutionRecord read_solution(std::istream &in) {
  SolutionRecord rec;
  std::string key;
  bool seen[3] = {false, false, false};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    if (!(ls >> key)) continue;
    if (key == "value") {
      if (!(ls >> rec.value)) throw ParseError("bad value", lineno);
      seen[0] = true;
    } else if (key == "set") {
      NodeId v;
      while (ls >> v) rec.members.push_back(v);
      if (!ls.eof()) throw ParseError("bad node id in set", lineno);
      seen[1] = true;
    } else if (key == "rounds") {
      if (!(ls >> rec.rounds)) throw ParseError("bad rounds", lineno);
      seen[2] = true;
    } else {
      throw ParseError("unknown record '" + key + "'", lineno);
    }
  }
  if (!(seen[0] && seen[1] && seen[2])) throw ParseError("solution record needs value, set and rounds lines");
  return rec;
}

} // namespace gcnmwis
