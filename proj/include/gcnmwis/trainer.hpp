#pragma once

// Unsupervised training of the embedding. For every training graph the
// current model schedules with local greedy on z * u, plain local greedy
// provides the baseline, and each selected node v gets the target
//
//   rho(v) = (u(S_gcn) + u(v)) / u(S_greedy)
//
// The model regresses z onto rho with a root-mean-square loss. No exact MWIS
// solution is needed during training; the exact solver is only used by
// evaluate().

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gcnmwis/errors.hpp"
#include "gcnmwis/gcn.hpp"
#include "gcnmwis/generators.hpp"
#include "gcnmwis/mwis.hpp"
#include "gcnmwis/parallel.hpp"
#include "gcnmwis/report.hpp"
#include "gcnmwis/rng.hpp"

namespace gcnmwis {

// ---------------------------------------------------------------------------
// Datasets

enum class GraphModel { er, ba };

struct UtilityDistribution {
  enum class Kind { uniform_real, uniform_int };
  Kind kind = Kind::uniform_real;
  double lo = 0.0;
  double hi = 1.0;

  static UtilityDistribution uniform01() { return {}; }
  static UtilityDistribution uniform_int(int lo, int hi) { return {Kind::uniform_int, double(lo), double(hi)}; }

  double draw(Rng &rng) const {
    if (kind == Kind::uniform_int)
      return static_cast<double>(rng.between(static_cast<std::int64_t>(lo), static_cast<std::int64_t>(hi)));
    return rng.uniform(lo, hi);
  }
};

/// `count` graphs of one model, cycling through sizes x (average degrees or
/// edge probabilities). Exactly one of the two parameter lists is non-empty.
struct DatasetEntry {
  GraphModel model = GraphModel::er;
  std::vector<std::size_t> sizes;
  std::vector<double> average_degrees;
  std::vector<double> edge_probabilities;
  std::size_t count = 0;
};

struct DatasetSpec {
  std::vector<DatasetEntry> entries;
  UtilityDistribution utilities;

  std::size_t total_count() const {
    std::size_t c = 0;
    for (const auto &e : entries) c += e.count;
    return c;
  }

  /// 5000 graphs with N in {100..300} and Np in {2, 5, 7.5, 10, 12.5}, plus
  /// 800 graphs with N in {30, 100} and p in {0.1 .. 0.9}.
  static DatasetSpec full_training(GraphModel model = GraphModel::er) {
    DatasetSpec s;
    s.entries.push_back({model, {100, 150, 200, 250, 300}, {2, 5, 7.5, 10, 12.5}, {}, 5000});
    s.entries.push_back({model, {30, 100}, {}, {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}, 800});
    return s;
  }

  /// 20 graphs for each N in {100..300} and Np in {2, 5, 10, 15, 20}.
  static DatasetSpec full_test(GraphModel model = GraphModel::er) {
    DatasetSpec s;
    s.entries.push_back({model, {100, 150, 200, 250, 300}, {2, 5, 10, 15, 20}, {}, 500});
    return s;
  }

  /// Reduced mix that trains in seconds: 440 graphs with N in {30, 60} and
  /// the training degrees, plus 60 graphs with N = 30 and p in {0.1 .. 0.6}.
  static DatasetSpec desk_training(GraphModel model = GraphModel::er) {
    DatasetSpec s;
    s.entries.push_back({model, {30, 60}, {2, 5, 7.5, 10, 12.5}, {}, 440});
    s.entries.push_back({model, {30}, {}, {0.1, 0.2, 0.3, 0.4, 0.5, 0.6}, 60});
    return s;
  }

  /// 10 graphs for each N in {50, 100} and Np in {2, 5, 10, 15, 20}.
  static DatasetSpec desk_test(GraphModel model = GraphModel::er) {
    DatasetSpec s;
    s.entries.push_back({model, {50, 100}, {2, 5, 10, 15, 20}, {}, 100});
    return s;
  }

  /// "full-train", "full-test", "desk-train" or "desk-test", optionally
  /// suffixed with "-ba" for the preferential-attachment variant.
  static DatasetSpec preset(std::string name) {
    GraphModel model = GraphModel::er;
    if (name.size() > 3 && name.ends_with("-ba")) {
      model = GraphModel::ba;
      name.resize(name.size() - 3);
    }
    if (name == "full-train") return full_training(model);
    if (name == "full-test") return full_test(model);
    if (name == "desk-train") return desk_training(model);
    if (name == "desk-test") return desk_test(model);
    throw ParameterError("unknown dataset preset '" + name + "'");
  }
};

struct Instance {
  std::string id;
  Graph graph;
  NodeUtilities utilities;
  double nominal_degree = 0.0;
};

inline Graph generate_model_graph(GraphModel model, std::size_t n, double p, std::uint64_t seed) {
  if (model == GraphModel::er) return gen_er(n, p, seed);
  return gen_ba(n, ba_attachment_count(n, static_cast<double>(n) * p), seed);
}

/// Materializes a dataset spec. Instance k uses sub-seed derive_seed(seed, k)
/// for its graph and a further derived stream for its utilities.
inline std::vector<Instance> generate_training_set(const DatasetSpec &spec, std::uint64_t seed) {
  std::vector<Instance> out;
  out.reserve(spec.total_count());
  std::size_t k = 0;
  if (spec.utilities.hi < spec.utilities.lo || spec.utilities.lo < 0.0)
    throw ParameterError("utility range must be non-negative and ordered");
  for (std::size_t e = 0; e < spec.entries.size(); ++e) {
    const auto &entry = spec.entries[e];
    if (entry.count == 0) continue;
    const bool by_degree = !entry.average_degrees.empty();
    if (by_degree == !entry.edge_probabilities.empty())
      throw ParameterError("dataset entry needs exactly one of average_degrees / edge_probabilities");
    if (entry.sizes.empty()) throw ParameterError("dataset entry has no sizes");
    const auto &params = by_degree ? entry.average_degrees : entry.edge_probabilities;
    for (std::size_t n : entry.sizes)
      for (double q : params) {
        const double p = by_degree ? q / static_cast<double>(n) : q;
        if (n < 2 || !(p > 0.0 && p < 1.0))
          throw ParameterError("infeasible dataset combination N=" + std::to_string(n) +
                               (by_degree ? ", Np=" : ", p=") + io_detail::real(q));
      }
    const std::size_t combos = entry.sizes.size() * params.size();
    for (std::size_t i = 0; i < entry.count; ++i, ++k) {
      const std::size_t combo = i % combos;
      const std::size_t n = entry.sizes[combo / params.size()];
      const double q = params[combo % params.size()];
      const double p = by_degree ? q / static_cast<double>(n) : q;
      const auto instance_seed = derive_seed(seed, k);
      Instance inst;
      inst.graph = generate_model_graph(entry.model, n, p, instance_seed);
      Rng rng(derive_seed(instance_seed, 0x75746c));
      inst.utilities.resize(n);
      for (double &u : inst.utilities) u = spec.utilities.draw(rng);
      inst.nominal_degree = static_cast<double>(n) * p;
      inst.id = std::string(entry.model == GraphModel::er ? "er" : "ba") + "-" + std::to_string(k);
      out.push_back(std::move(inst));
    }
  }
  return out;
}

inline nlohmann::json dataset_spec_to_json(const DatasetSpec &s) {
  nlohmann::json j;
  j["utilities"] = {{"kind", s.utilities.kind == UtilityDistribution::Kind::uniform_int ? "uniform_int" : "uniform_real"},
                    {"lo", s.utilities.lo},
                    {"hi", s.utilities.hi}};
  j["entries"] = nlohmann::json::array();
  for (const auto &e : s.entries) {
    nlohmann::json ej{{"model", e.model == GraphModel::er ? "er" : "ba"}, {"sizes", e.sizes}, {"count", e.count}};
    if (!e.average_degrees.empty()) ej["average_degrees"] = e.average_degrees;
    if (!e.edge_probabilities.empty()) ej["edge_probabilities"] = e.edge_probabilities;
    j["entries"].push_back(std::move(ej));
  }
  return j;
}

inline DatasetSpec dataset_spec_from_json(const nlohmann::json &j) {
  DatasetSpec s;
  try {
    if (j.contains("utilities")) {
      const auto &u = j.at("utilities");
      const auto kind = u.value("kind", std::string("uniform_real"));
      if (kind == "uniform_int")
        s.utilities.kind = UtilityDistribution::Kind::uniform_int;
      else if (kind != "uniform_real")
        throw ParseError("unknown utility distribution '" + kind + "'");
      s.utilities.lo = u.value("lo", 0.0);
      s.utilities.hi = u.value("hi", 1.0);
    }
    for (const auto &ej : j.at("entries")) {
      DatasetEntry e;
      const auto model = ej.value("model", std::string("er"));
      if (model == "ba")
        e.model = GraphModel::ba;
      else if (model != "er")
        throw ParseError("unknown graph model '" + model + "'");
      e.sizes = ej.at("sizes").get<std::vector<std::size_t>>();
      e.average_degrees = ej.value("average_degrees", std::vector<double>{});
      e.edge_probabilities = ej.value("edge_probabilities", std::vector<double>{});
      e.count = ej.at("count").get<std::size_t>();
      s.entries.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception &e) {
    throw ParseError(std::string("malformed dataset spec: ") + e.what());
  }
  return s;
}

// ---------------------------------------------------------------------------
// Rewards and loss

enum class RewardMode { baseline_fill, selected_only };

inline std::string to_string(RewardMode m) { return m == RewardMode::baseline_fill ? "baseline_fill" : "selected_only"; }

inline RewardMode reward_mode_from_string(const std::string &s) {
  if (s == "baseline_fill") return RewardMode::baseline_fill;
  if (s == "selected_only") return RewardMode::selected_only;
  throw ParameterError("unknown reward mode '" + s + "'");
}

struct Rewards {
  std::vector<double> targets;
  /// 1 where the node enters the loss.
  std::vector<char> active;
};

/// Targets for one graph. Selected nodes get (u(S_gcn) + u(v)) / u(S_greedy).
/// Unselected nodes get u(S_gcn) / u(S_greedy) under baseline_fill and are
/// masked out under selected_only.
inline Rewards compute_rewards(const Graph &g, std::span<const double> u, const IndependentSet &gcn_set,
                               const IndependentSet &greedy_set, RewardMode mode) {
  check_utilities(g, u);
  if (!(greedy_set.total_utility > 0.0)) throw UndefinedRatioError("reward undefined: greedy utility is zero");
  const double base = gcn_set.total_utility / greedy_set.total_utility;
  Rewards r;
  r.targets.assign(g.num_nodes(), base);
  r.active.assign(g.num_nodes(), mode == RewardMode::baseline_fill ? 1 : 0);
  for (NodeId v : gcn_set.members) {
    r.targets[v] = (gcn_set.total_utility + u[v]) / greedy_set.total_utility;
    r.active[v] = 1;
  }
  return r;
}

struct LossResult {
  double loss = 0.0;
  std::vector<double> grad; // dloss/dz
  std::size_t active = 0;
};

/// sqrt(mean over active nodes of (z - rho)^2) and its gradient. An empty
/// mask means every node is active; the gradient at zero loss is zero.
inline LossResult rms_loss(std::span<const double> z, std::span<const double> rho, std::span<const char> mask = {}) {
  if (z.size() != rho.size()) throw DimensionError("embedding and reward lengths differ");
  if (!mask.empty() && mask.size() != z.size()) throw DimensionError("mask length differs from embedding");
  LossResult out;
  out.grad.assign(z.size(), 0.0);
  double sq = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (!mask.empty() && !mask[i]) continue;
    ++out.active;
    sq += (z[i] - rho[i]) * (z[i] - rho[i]);
  }
  if (out.active == 0) throw ParameterError("loss needs at least one active node");
  out.loss = std::sqrt(sq / static_cast<double>(out.active));
  if (out.loss == 0.0) return out;
  const double scale = 1.0 / (static_cast<double>(out.active) * out.loss);
  for (std::size_t i = 0; i < z.size(); ++i)
    if (mask.empty() || mask[i]) out.grad[i] = (z[i] - rho[i]) * scale;
  return out;
}

// ---------------------------------------------------------------------------
// Optimizer and replay buffer

class Adam {
public:
  Adam(const GcnParams &shape, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : beta1_(beta1), beta2_(beta2), eps_(eps), m_(zero_gradients(shape)), v_(zero_gradients(shape)) {}

  /// Zeroes both moment estimates and the bias-correction step counter.
  void reset() {
    for (auto *moments : {&m_, &v_})
      for (auto &layer : *moments) {
        layer.theta0.setZero();
        layer.theta1.setZero();
      }
    t_ = 0;
  }

  void step(GcnParams &p, const GcnGradients &grads, double lr) {
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
      update(p.layers[l].theta0, grads[l].theta0, m_[l].theta0, v_[l].theta0, lr, c1, c2);
      update(p.layers[l].theta1, grads[l].theta1, m_[l].theta1, v_[l].theta1, lr, c1, c2);
    }
  }

  long steps() const noexcept { return t_; }

private:
  void update(Eigen::MatrixXd &theta, const Eigen::MatrixXd &g, Eigen::MatrixXd &m, Eigen::MatrixXd &v, double lr,
              double c1, double c2) const {
    m = beta1_ * m + (1.0 - beta1_) * g;
    v = beta2_ * v + (1.0 - beta2_) * g.cwiseProduct(g);
    for (Eigen::Index i = 0; i < theta.size(); ++i)
      theta.data()[i] -= lr * (m.data()[i] / c1) / (std::sqrt(v.data()[i] / c2) + eps_);
  }

  double beta1_, beta2_, eps_;
  GcnGradients m_, v_;
  long t_ = 0;
};

struct TrainSample {
  std::size_t instance = 0; // index into the dataset
  Rewards rewards;
  double gcn_utility = 0.0;
  double greedy_utility = 0.0;
};

/// Bounded FIFO of samples with uniform sampling without replacement.
class ReplayBuffer {
public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ParameterError("replay buffer capacity must be positive");
  }

  void push(TrainSample s) {
    if (items_.size() == capacity_) items_.pop_front();
    items_.push_back(std::move(s));
  }

  std::size_t size() const noexcept { return items_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }
  const TrainSample &operator[](std::size_t i) const { return items_[i]; }

  /// Indices of min(batch, size()) distinct samples (partial Fisher-Yates).
  std::vector<std::size_t> sample(std::size_t batch, Rng &rng) const {
    std::vector<std::size_t> idx(items_.size());
    std::iota(idx.begin(), idx.end(), 0);
    const std::size_t k = std::min(batch, idx.size());
    for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + rng.below(idx.size() - i)]);
    idx.resize(k);
    return idx;
  }

private:
  std::size_t capacity_;
  std::deque<TrainSample> items_;
};

// ---------------------------------------------------------------------------
// Training

struct TrainConfig {
  std::size_t batch_size = 200;
  int epochs = 25;
  double lr0 = 1e-3;
  double lr_decay = 0.9;
  /// Epochs between optimizer-moment resets; 0 disables.
  int reset_period = 5;
  RewardMode reward_mode = RewardMode::baseline_fill;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::size_t replay_capacity = 5000;
  /// Adam steps per epoch; 0 means ceil(dataset size / batch size).
  std::size_t updates_per_epoch = 0;
  bool normalize = true;
  unsigned jobs = 1;

  void validate() const {
    if (batch_size == 0) throw ParameterError("batch_size must be positive");
    if (epochs < 0) throw ParameterError("epochs must be non-negative");
    if (!(lr0 >= 0.0) || !std::isfinite(lr0)) throw ParameterError("lr0 must be a non-negative number");
    if (!(lr_decay > 0.0 && lr_decay <= 1.0)) throw ParameterError("lr_decay must lie in (0, 1]");
    if (reset_period < 0) throw ParameterError("reset_period must be non-negative");
    if (replay_capacity == 0) throw ParameterError("replay_capacity must be positive");
  }
};

inline nlohmann::json train_config_to_json(const TrainConfig &c) {
  return {{"batch_size", c.batch_size},     {"epochs", c.epochs},
          {"lr0", c.lr0},                   {"lr_decay", c.lr_decay},
          {"reset_period", c.reset_period}, {"reward_mode", to_string(c.reward_mode)},
          {"seed", c.seed},                 {"beta1", c.beta1},
          {"beta2", c.beta2},               {"adam_eps", c.adam_eps},
          {"replay_capacity", c.replay_capacity}, {"updates_per_epoch", c.updates_per_epoch},
          {"normalize", c.normalize}};
}

/// Missing keys keep their defaults.
inline TrainConfig train_config_from_json(const nlohmann::json &j) {
  TrainConfig c;
  try {
    c.batch_size = j.value("batch_size", c.batch_size);
    c.epochs = j.value("epochs", c.epochs);
    c.lr0 = j.value("lr0", c.lr0);
    c.lr_decay = j.value("lr_decay", c.lr_decay);
    c.reset_period = j.value("reset_period", c.reset_period);
    c.reward_mode = reward_mode_from_string(j.value("reward_mode", to_string(c.reward_mode)));
    c.seed = j.value("seed", c.seed);
    c.beta1 = j.value("beta1", c.beta1);
    c.beta2 = j.value("beta2", c.beta2);
    c.adam_eps = j.value("adam_eps", c.adam_eps);
    c.replay_capacity = j.value("replay_capacity", c.replay_capacity);
    c.updates_per_epoch = j.value("updates_per_epoch", c.updates_per_epoch);
    c.normalize = j.value("normalize", c.normalize);
  } catch (const nlohmann::json::exception &e) {
    throw ParseError(std::string("malformed training config: ") + e.what());
  }
  c.validate();
  return c;
}

struct EpochStats {
  int epoch = 0;
  double mean_loss = 0.0;
  /// Mean of u(S_gcn) / u(S_greedy) over the samples generated this epoch.
  double mean_ratio_vs_greedy = 0.0;
  double lr = 0.0;
  std::size_t samples = 0;
  std::size_t updates = 0;

  friend bool operator==(const EpochStats &, const EpochStats &) = default;
};

struct TrainHistory {
  RewardMode reward_mode = RewardMode::baseline_fill;
  std::vector<EpochStats> epochs;

  void write_csv(std::ostream &out) const {
    out << "epoch,mean_loss,mean_ratio_vs_greedy,lr\n";
    for (const auto &e : epochs)
      out << e.epoch << ',' << io_detail::real(e.mean_loss) << ',' << io_detail::real(e.mean_ratio_vs_greedy) << ','
          << io_detail::real(e.lr) << '\n';
  }

  friend bool operator==(const TrainHistory &, const TrainHistory &) = default;
};

struct TrainResult {
  GcnParams params;
  TrainHistory history;
};

/// Raised when the loss stops being finite; carries the parameters from the
/// end of the last finite epoch.
class TrainingDiverged : public NumericError {
public:
  TrainingDiverged(GcnParams last_good, int epoch)
      : NumericError("training diverged in epoch " + std::to_string(epoch)), last_good_(std::move(last_good)) {}
  const GcnParams &last_good() const noexcept { return last_good_; }

private:
  GcnParams last_good_;
};

using EpochCallback = std::function<void(const EpochStats &, const GcnParams &)>;

inline TrainResult train(const TrainConfig &config, std::span<const Instance> dataset, GcnParams init,
                         const EpochCallback &on_epoch = {}) {
  config.validate();
  init.validate();
  if (dataset.empty()) throw ParameterError("training dataset is empty");

  TrainResult result{std::move(init), {}};
  result.history.reward_mode = config.reward_mode;
  GcnParams &params = result.params;
  Adam adam(params, config.beta1, config.beta2, config.adam_eps);
  ReplayBuffer buffer(config.replay_capacity);
  const ScheduleOptions schedule{config.normalize, false};
  const std::size_t updates =
      config.updates_per_epoch ? config.updates_per_epoch : (dataset.size() + config.batch_size - 1) / config.batch_size;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const GcnParams checkpoint = params;
    try {
      Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(epoch)));
      const double lr = config.lr0 * std::pow(config.lr_decay, epoch);
      if (config.reset_period > 0 && epoch > 0 && epoch % config.reset_period == 0) adam.reset();

      // Fresh samples from the current policy.
      std::vector<std::size_t> order(dataset.size());
      std::iota(order.begin(), order.end(), 0);
      for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
      std::vector<std::optional<TrainSample>> fresh(order.size());
      parallel_for(order.size(), config.jobs, [&](std::size_t i) {
        const auto &inst = dataset[order[i]];
        const auto greedy = local_greedy(inst.graph, inst.utilities).set;
        if (!(greedy.total_utility > 0.0)) return;
        const auto gcn = gcn_schedule(params, inst.graph, inst.utilities, schedule).set;
        fresh[i] = TrainSample{order[i],
                               compute_rewards(inst.graph, inst.utilities, gcn, greedy, config.reward_mode),
                               gcn.total_utility, greedy.total_utility};
      });
      EpochStats stats;
      stats.epoch = epoch;
      stats.lr = lr;
      for (auto &s : fresh) {
        if (!s) continue;
        stats.mean_ratio_vs_greedy += s->gcn_utility / s->greedy_utility;
        ++stats.samples;
        buffer.push(std::move(*s));
      }
      if (stats.samples) stats.mean_ratio_vs_greedy /= static_cast<double>(stats.samples);

      double loss_sum = 0.0;
      std::size_t loss_count = 0;
      for (std::size_t u = 0; u < updates && buffer.size() > 0; ++u) {
        const auto batch = buffer.sample(config.batch_size, rng);
        std::vector<double> losses(batch.size());
        std::vector<GcnGradients> grads(batch.size());
        parallel_for(batch.size(), config.jobs, [&](std::size_t b) {
          const auto &sample = buffer[batch[b]];
          const auto &inst = dataset[sample.instance];
          const auto fwd = gcn_forward(params, inst.graph, gcn_input(inst.utilities, config.normalize));
          const auto loss = rms_loss(fwd.z, sample.rewards.targets, sample.rewards.active);
          losses[b] = loss.loss;
          grads[b] = gcn_backward(params, fwd.cache, loss.grad);
        });
        GcnGradients total = zero_gradients(params);
        for (std::size_t b = 0; b < batch.size(); ++b) {
          loss_sum += losses[b];
          ++loss_count;
          for (std::size_t l = 0; l < total.size(); ++l) {
            total[l].theta0 += grads[b][l].theta0;
            total[l].theta1 += grads[b][l].theta1;
          }
        }
        if (!std::isfinite(loss_sum)) throw TrainingDiverged(checkpoint, epoch);
        const double inv = 1.0 / static_cast<double>(batch.size());
        for (auto &layer : total) {
          layer.theta0 *= inv;
          layer.theta1 *= inv;
        }
        adam.step(params, total, lr);
        try {
          params.validate();
        } catch (const ParameterError &) {
          throw TrainingDiverged(checkpoint, epoch);
        }
        ++stats.updates;
      }
      stats.mean_loss = loss_count ? loss_sum / static_cast<double>(loss_count) : 0.0;
      if (!std::isfinite(stats.mean_loss)) throw TrainingDiverged(checkpoint, epoch);
      result.history.epochs.push_back(stats);
    } catch (const TrainingDiverged &) {
      throw;
    } catch (const NumericError &) {
      throw TrainingDiverged(checkpoint, epoch);
    }
    if (on_epoch) on_epoch(result.history.epochs.back(), params);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Evaluation against the exact oracle

struct EvalOptions {
  SolverBudget budget;
  bool normalize = true;
  unsigned jobs = 1;
};

/// Approximation ratios of local greedy ("greedy") and the GCN pipeline
/// ("gcn") against exact_mwis. Instances where the oracle runs out of budget
/// or the optimum is zero are flagged and left out.
inline EvalReport evaluate(const GcnParams &p, std::span<const Instance> testset, const EvalOptions &options = {}) {
  struct Row {
    bool flagged = false;
    EvalRecord greedy, gcn;
  };
  std::vector<Row> rows(testset.size());
  parallel_for(testset.size(), options.jobs, [&](std::size_t i) {
    const auto &inst = testset[i];
    IndependentSet optimal;
    try {
      optimal = exact_mwis(inst.graph, inst.utilities, options.budget);
    } catch (const BudgetExhausted &) {
      rows[i].flagged = true;
      return;
    }
    if (!(optimal.total_utility > 0.0)) {
      rows[i].flagged = true;
      return;
    }
    const auto lg = local_greedy(inst.graph, inst.utilities);
    const auto gs = gcn_schedule(p, inst.graph, inst.utilities, {options.normalize, false});
    const EvalRecord base{inst.id, inst.graph.num_nodes(), inst.nominal_degree, "", 0.0, 0};
    rows[i].greedy = base;
    rows[i].greedy.solver = "greedy";
    rows[i].greedy.ratio = approximation_ratio(lg.set, optimal);
    rows[i].greedy.rounds = lg.trace.total_rounds();
    rows[i].gcn = base;
    rows[i].gcn.solver = "gcn";
    rows[i].gcn.ratio = approximation_ratio(gs.set, optimal);
    rows[i].gcn.rounds = gs.trace.total_rounds();
  });
  EvalReport report;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].flagged) {
      report.flagged.push_back(testset[i].id);
      continue;
    }
    report.records.push_back(std::move(rows[i].greedy));
    report.records.push_back(std::move(rows[i].gcn));
  }
  return report;
}

} // namespace gcnmwis
