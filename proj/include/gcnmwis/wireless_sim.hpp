#pragma once

// Slotted queueing simulation on a wireless conflict graph. Each slot draws
// link rates, schedules an independent set of links on u = min(q, r),
// delivers, then adds Poisson arrivals. All draws for slot t come from
// derive_seed(seed, t), so every scheduler sees the same rates and arrivals.

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gcnmwis/gcn.hpp"
#include "gcnmwis/mwis.hpp"
#include "gcnmwis/network.hpp"
#include "gcnmwis/parallel.hpp"
#include "gcnmwis/report.hpp"
#include "gcnmwis/rng.hpp"

namespace gcnmwis {

inline constexpr int kMaxLinkRate = 100;
inline constexpr double kDefaultArrivalRate = 60.0;

struct QueueState {
  std::vector<std::int64_t> q;

  friend bool operator==(const QueueState &, const QueueState &) = default;
};

struct ScheduleDecision {
  IndependentSet set;
  int rounds = 0;
};

using Scheduler = std::function<ScheduleDecision(const Graph &, std::span<const double>)>;

inline Scheduler greedy_scheduler() {
  return [](const Graph &g, std::span<const double> u) {
    auto r = local_greedy(g, u);
    return ScheduleDecision{validate_set(g, r.set.members, u), r.trace.total_rounds()};
  };
}

inline Scheduler exact_scheduler(SolverBudget budget = {}) {
  return [budget](const Graph &g, std::span<const double> u) { return ScheduleDecision{exact_mwis(g, u, budget), 0}; };
}

inline Scheduler gcn_scheduler(GcnParams params, bool normalize = true) {
  return [p = std::move(params), normalize](const Graph &g, std::span<const double> u) {
    auto r = gcn_schedule(p, g, u, {normalize, false});
    return ScheduleDecision{std::move(r.set), r.trace.total_rounds()};
  };
}

struct SlotResult {
  std::vector<std::int64_t> backlog; // before transmission
  std::vector<int> rates;
  std::vector<double> utilities;
  IndependentSet scheduled;
  int rounds = 0;
  std::vector<std::int64_t> delivered;
  std::vector<std::int64_t> arrivals;

  std::int64_t total_delivered() const {
    std::int64_t s = 0;
    for (auto d : delivered) s += d;
    return s;
  }

  friend bool operator==(const SlotResult &, const SlotResult &) = default;
};

/// Advances one slot. Throws NotIndependentError if the scheduler violates
/// the conflict graph.
inline std::pair<SlotResult, QueueState> sim_step(const WirelessNetwork &net, const QueueState &queues,
                                                  const Scheduler &scheduler, double arrival_rate, Rng &rng) {
  const auto m = net.num_links();
  if (queues.q.size() != m) throw DimensionError("queue state does not match link count");
  if (!(arrival_rate >= 0.0) || !std::isfinite(arrival_rate)) throw ParameterError("arrival rate must be >= 0");
  SlotResult slot;
  slot.backlog = queues.q;
  slot.rates.resize(m);
  slot.utilities.resize(m);
  for (std::size_t v = 0; v < m; ++v) {
    slot.rates[v] = static_cast<int>(rng.between(0, kMaxLinkRate));
    slot.utilities[v] = static_cast<double>(std::min<std::int64_t>(queues.q[v], slot.rates[v]));
  }
  auto decision = scheduler(net.conflict_graph, slot.utilities);
  slot.scheduled = validate_set(net.conflict_graph, decision.set.members, slot.utilities);
  slot.rounds = decision.rounds;

  QueueState next = queues;
  slot.delivered.assign(m, 0);
  for (NodeId v : slot.scheduled.members) {
    slot.delivered[v] = static_cast<std::int64_t>(slot.utilities[v]);
    next.q[v] -= slot.delivered[v];
  }
  slot.arrivals.resize(m);
  for (std::size_t v = 0; v < m; ++v) {
    slot.arrivals[v] = rng.poisson(arrival_rate);
    next.q[v] += slot.arrivals[v];
  }
  return {std::move(slot), std::move(next)};
}

struct ScheduleTrace {
  std::vector<SlotResult> slots;
  /// Delivered packets summed over slots at or after the warm-up.
  std::int64_t cumulative_delivered = 0;
  QueueState final_queues;
  int warmup = 0;

  friend bool operator==(const ScheduleTrace &, const ScheduleTrace &) = default;

  void write_csv(std::ostream &out) const {
    out << "slot,link,rate,queue,delivered\n";
    for (std::size_t t = 0; t < slots.size(); ++t)
      for (std::size_t v = 0; v < slots[t].rates.size(); ++v)
        out << t << ',' << v << ',' << slots[t].rates[v] << ',' << slots[t].backlog[v] << ','
            << slots[t].delivered[v] << '\n';
  }
};

inline ScheduleTrace run_instance(const WirelessNetwork &net, const Scheduler &scheduler, int slots,
                                  double arrival_rate, std::uint64_t seed, int warmup = 0) {
  if (slots < 1) throw ParameterError("need at least one slot");
  if (warmup < 0 || warmup >= slots) throw ParameterError("warm-up must lie in [0, slots)");
  ScheduleTrace trace;
  trace.warmup = warmup;
  QueueState q{std::vector<std::int64_t>(net.num_links(), 0)};
  for (int t = 0; t < slots; ++t) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    auto [slot, next] = sim_step(net, q, scheduler, arrival_rate, rng);
    if (t >= warmup) trace.cumulative_delivered += slot.total_delivered();
    trace.slots.push_back(std::move(slot));
    q = std::move(next);
  }
  trace.final_queues = std::move(q);
  return trace;
}

struct SimulationOptions {
  int slots = 200;
  int instances = 10;
  double arrival_rate = kDefaultArrivalRate;
  int warmup = 0;
  std::uint64_t seed = 0;
  SolverBudget budget;
  unsigned jobs = 1;
  /// Also emit the reference scheduler's own records (ratio 1) as "exact".
  bool report_reference = false;
};

using NamedScheduler = std::pair<std::string, Scheduler>;

/// Seed of instance k on network i.
inline std::uint64_t instance_seed(std::uint64_t seed, std::size_t network, std::size_t instance) {
  return derive_seed(derive_seed(seed, network), instance);
}

/// Throughput ratio of each candidate against the per-slot exact scheduler,
/// one record per (network, instance, candidate). Ratios compare cumulative
/// delivered packets of separate runs, so they may exceed 1.
inline EvalReport compare_schedulers(std::span<const WirelessNetwork> nets, std::span<const NamedScheduler> candidates,
                                     const SimulationOptions &options) {
  if (options.instances < 1) throw ParameterError("need at least one instance per network");
  const auto runs = nets.size() * static_cast<std::size_t>(options.instances);
  struct Row {
    bool flagged = false;
    std::vector<EvalRecord> records;
  };
  std::vector<Row> rows(runs);
  const auto reference = exact_scheduler(options.budget);
  parallel_for(runs, options.jobs, [&](std::size_t r) {
    const auto i = r / static_cast<std::size_t>(options.instances);
    const auto k = r % static_cast<std::size_t>(options.instances);
    const auto &net = nets[i];
    const auto seed = instance_seed(options.seed, i, k);
    std::int64_t ref = 0;
    try {
      ref = run_instance(net, reference, options.slots, options.arrival_rate, seed, options.warmup).cumulative_delivered;
    } catch (const BudgetExhausted &) {
      rows[r].flagged = true;
      return;
    }
    if (ref == 0) {
      rows[r].flagged = true;
      return;
    }
    const auto id = "net" + std::to_string(i) + "-run" + std::to_string(k);
    if (options.report_reference)
      rows[r].records.push_back({id, net.num_links(), net.conflict_graph.average_degree(), "exact", 1.0, 0});
    for (const auto &[name, scheduler] : candidates) {
      const auto trace = run_instance(net, scheduler, options.slots, options.arrival_rate, seed, options.warmup);
      int rounds = 0;
      for (const auto &s : trace.slots) rounds = std::max(rounds, s.rounds);
      rows[r].records.push_back({id, net.num_links(),
                                 net.conflict_graph.average_degree(), name,
                                 static_cast<double>(trace.cumulative_delivered) / static_cast<double>(ref), rounds});
    }
  });
  EvalReport report;
  for (std::size_t r = 0; r < runs; ++r) {
    if (rows[r].flagged) {
      report.flagged.push_back("net" + std::to_string(r / options.instances) + "-run" +
                               std::to_string(r % options.instances));
      continue;
    }
    for (auto &rec : rows[r].records) report.records.push_back(std::move(rec));
  }
  return report;
}

} // namespace gcnmwis
