#pragma once

// Graph convolutional embedding that rescales node utilities before the local
// greedy solver. Each layer computes
//
//   X_{l+1} = act(X_l * Theta0_l + Lap * X_l * Theta1_l)
//
// with Lap the symmetric normalized Laplacian, leaky ReLU on every layer but
// the last, and scalar input and output features.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "gcnmwis/errors.hpp"
#include "gcnmwis/graph.hpp"
#include "gcnmwis/graph_io.hpp"
#include "gcnmwis/mwis.hpp"
#include "gcnmwis/rng.hpp"

namespace gcnmwis {

inline constexpr int kModelVersion = 1;

struct GcnLayer {
  Eigen::MatrixXd theta0; // g_l x g_{l+1}, applied to X
  Eigen::MatrixXd theta1; // g_l x g_{l+1}, applied to Lap X

  friend bool operator==(const GcnLayer &a, const GcnLayer &b) {
    return a.theta0.rows() == b.theta0.rows() && a.theta0.cols() == b.theta0.cols() &&
           a.theta1.rows() == b.theta1.rows() && a.theta1.cols() == b.theta1.cols() && a.theta0 == b.theta0 &&
           a.theta1 == b.theta1;
  }
};

struct GcnParams {
  int version = kModelVersion;
  std::vector<int> dims; // g_0 .. g_L, g_0 = g_L = 1
  double leaky_slope = 0.01;
  std::vector<GcnLayer> layers;

  int num_layers() const noexcept { return static_cast<int>(layers.size()); }

  /// Throws ParameterError if dims, shapes, slope or entries are inconsistent.
  void validate() const {
    if (dims.size() < 2) throw ParameterError("GCN needs at least one layer");
    if (dims.front() != 1 || dims.back() != 1) throw ParameterError("GCN input and output widths must be 1");
    if (std::any_of(dims.begin(), dims.end(), [](int d) { return d <= 0; }))
      throw ParameterError("GCN layer widths must be positive");
    if (!(leaky_slope > 0.0 && leaky_slope < 1.0)) throw ParameterError("leaky slope must lie in (0, 1)");
    if (layers.size() + 1 != dims.size()) throw ParameterError("layer count does not match dims");
    for (std::size_t l = 0; l < layers.size(); ++l) {
      for (const auto *m : {&layers[l].theta0, &layers[l].theta1}) {
        if (m->rows() != dims[l] || m->cols() != dims[l + 1])
          throw ParameterError("layer " + std::to_string(l) + " parameter shape does not match dims");
        if (!m->allFinite()) throw ParameterError("layer " + std::to_string(l) + " has non-finite parameters");
      }
    }
  }

  friend bool operator==(const GcnParams &, const GcnParams &) = default;
};

/// Scalar per-node scaling factors z(v).
using Embedding = std::vector<double>;

/// Per-layer intermediates kept for the backward pass.
struct ForwardCache {
  Graph graph;
  std::vector<Eigen::MatrixXd> activations;     // X_0 .. X_L
  std::vector<Eigen::MatrixXd> lap_activations; // Lap X_0 .. Lap X_{L-1}
  std::vector<Eigen::MatrixXd> pre_activations; // before the nonlinearity, layers 0 .. L-1
};

struct ForwardResult {
  Embedding z;
  ForwardCache cache;
};

using GcnGradients = std::vector<GcnLayer>;

/// Glorot-uniform initialization: entries uniform in +-sqrt(6 / (g_l + g_{l+1})).
inline GcnParams glorot_init(std::vector<int> dims, double leaky_slope, std::uint64_t seed) {
  GcnParams p;
  p.dims = std::move(dims);
  p.leaky_slope = leaky_slope;
  if (p.dims.size() < 2) throw ParameterError("GCN needs at least one layer");
  for (int d : p.dims)
    if (d <= 0) throw ParameterError("GCN layer widths must be positive");
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < p.dims.size(); ++l) {
    const double bound = std::sqrt(6.0 / (p.dims[l] + p.dims[l + 1]));
    GcnLayer layer{Eigen::MatrixXd(p.dims[l], p.dims[l + 1]), Eigen::MatrixXd(p.dims[l], p.dims[l + 1])};
    for (auto *m : {&layer.theta0, &layer.theta1})
      for (Eigen::Index r = 0; r < m->rows(); ++r)
        for (Eigen::Index c = 0; c < m->cols(); ++c) (*m)(r, c) = rng.uniform(-bound, bound);
    p.layers.push_back(std::move(layer));
  }
  p.validate();
  return p;
}

/// One-layer model with z = theta0 * x + theta1 * (Lap x).
inline GcnParams one_layer_model(double theta0, double theta1, double leaky_slope = 0.01) {
  GcnParams p;
  p.dims = {1, 1};
  p.leaky_slope = leaky_slope;
  p.layers.push_back({Eigen::MatrixXd::Constant(1, 1, theta0), Eigen::MatrixXd::Constant(1, 1, theta1)});
  p.validate();
  return p;
}

inline GcnGradients zero_gradients(const GcnParams &p) {
  GcnGradients g;
  for (const auto &layer : p.layers)
    g.push_back({Eigen::MatrixXd::Zero(layer.theta0.rows(), layer.theta0.cols()),
                 Eigen::MatrixXd::Zero(layer.theta1.rows(), layer.theta1.cols())});
  return g;
}

inline ForwardResult gcn_forward(const GcnParams &p, const Graph &g, std::span<const double> x0) {
  if (x0.size() != g.num_nodes())
    throw DimensionError("input has " + std::to_string(x0.size()) + " entries, graph has " +
                         std::to_string(g.num_nodes()) + " nodes");
  if (p.layers.empty()) throw ParameterError("GCN has no layers");
  for (std::size_t i = 0; i < x0.size(); ++i)
    if (!std::isfinite(x0[i])) throw NumericError("input feature of node " + std::to_string(i) + " is not finite");

  ForwardResult out;
  out.cache.graph = g;
  const NormalizedLaplacian lap(out.cache.graph);
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  Eigen::MatrixXd x(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) x(i, 0) = x0[static_cast<std::size_t>(i)];
  out.cache.activations.push_back(x);

  const auto num_layers = p.layers.size();
  for (std::size_t l = 0; l < num_layers; ++l) {
    const auto &layer = p.layers[l];
    const auto &xl = out.cache.activations.back();
    if (xl.cols() != layer.theta0.rows()) throw DimensionError("layer " + std::to_string(l) + " input width mismatch");
    Eigen::MatrixXd lx = lap.apply(xl);
    Eigen::MatrixXd h = xl * layer.theta0 + lx * layer.theta1;
    Eigen::MatrixXd next = h;
    if (l + 1 < num_layers) next = h.unaryExpr([a = p.leaky_slope](double v) { return v > 0.0 ? v : a * v; });
    if (!next.allFinite()) throw NumericError("non-finite activation in GCN layer " + std::to_string(l));
    out.cache.lap_activations.push_back(std::move(lx));
    out.cache.pre_activations.push_back(std::move(h));
    out.cache.activations.push_back(std::move(next));
  }
  const auto &z = out.cache.activations.back();
  out.z.assign(z.data(), z.data() + z.rows());
  return out;
}

/// Closed form of the single-layer model, evaluated node by node from
/// neighbor utilities and degrees only.
inline Embedding gcn_forward_1layer(double theta0, double theta1, const Graph &g, std::span<const double> u) {
  if (u.size() != g.num_nodes()) throw DimensionError("utility vector does not match graph");
  if (!std::isfinite(theta0) || !std::isfinite(theta1)) throw NumericError("non-finite parameters");
  Embedding z(g.num_nodes());
  for (std::size_t v = 0; v < z.size(); ++v) {
    const auto nbrs = g.neighbors(static_cast<NodeId>(v));
    double spread = 0.0;
    const double dv = static_cast<double>(nbrs.size());
    for (NodeId nb : nbrs) spread += u[nb] / (std::sqrt(dv) * std::sqrt(static_cast<double>(g.degree(nb))));
    z[v] = u[v] * theta0 + (u[v] - spread) * theta1;
  }
  return z;
}

/// Reverse-mode gradients of a scalar loss with respect to every parameter,
/// given dLoss/dz. Uses Lap^T = Lap.
inline GcnGradients gcn_backward(const GcnParams &p, const ForwardCache &cache, std::span<const double> grad_z) {
  const auto num_layers = p.layers.size();
  if (cache.pre_activations.size() != num_layers || cache.activations.size() != num_layers + 1 ||
      cache.lap_activations.size() != num_layers)
    throw ParameterError("forward cache does not belong to these parameters (layer count)");
  for (std::size_t l = 0; l < num_layers; ++l)
    if (cache.pre_activations[l].cols() != p.layers[l].theta0.cols() ||
        cache.activations[l].cols() != p.layers[l].theta0.rows())
      throw ParameterError("forward cache does not belong to these parameters (layer " + std::to_string(l) + ")");
  const auto n = static_cast<Eigen::Index>(cache.graph.num_nodes());
  if (static_cast<Eigen::Index>(grad_z.size()) != n) throw DimensionError("gradient length does not match graph");

  const NormalizedLaplacian lap(cache.graph);
  GcnGradients grads(num_layers);
  Eigen::MatrixXd upstream(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) upstream(i, 0) = grad_z[static_cast<std::size_t>(i)];

  for (std::size_t l = num_layers; l-- > 0;) {
    Eigen::MatrixXd dh = upstream;
    if (l + 1 < num_layers) {
      const auto &h = cache.pre_activations[l];
      dh = dh.cwiseProduct(h.unaryExpr([a = p.leaky_slope](double v) { return v > 0.0 ? 1.0 : a; }));
    }
    grads[l].theta0 = cache.activations[l].transpose() * dh;
    grads[l].theta1 = cache.lap_activations[l].transpose() * dh;
    if (l > 0) upstream = dh * p.layers[l].theta0.transpose() + lap.apply(dh * p.layers[l].theta1.transpose());
  }
  return grads;
}

struct ScheduleOptions {
  /// Feed u / max(u) to the GCN (skipped when max(u) = 0).
  bool normalize = true;
  bool single_round = false;
};

struct ScheduleResult {
  IndependentSet set; // scored with the original utilities
  Embedding z;
  std::vector<double> weights; // z * u
  RoundTrace trace;
};

/// Input feature vector handed to the GCN for utilities `u`.
inline std::vector<double> gcn_input(std::span<const double> u, bool normalize) {
  std::vector<double> x(u.begin(), u.end());
  if (!normalize || x.empty()) return x;
  const double top = *std::max_element(x.begin(), x.end());
  if (top > 0.0)
    for (double &v : x) v /= top;
  return x;
}

/// Full pipeline: embed, rescale the original utilities by z, run local greedy.
inline ScheduleResult gcn_schedule(const GcnParams &p, const Graph &g, std::span<const double> u,
                                   ScheduleOptions options = {}) {
  check_utilities(g, u);
  auto forward = gcn_forward(p, g, gcn_input(u, options.normalize));
  ScheduleResult out;
  out.z = std::move(forward.z);
  out.weights.resize(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out.weights[i] = out.z[i] * u[i];
  auto lg = local_greedy(g, out.weights, {options.single_round});
  out.set = validate_set(g, lg.set.members, u);
  out.trace = std::move(lg.trace);
  out.trace.embedding_rounds = p.num_layers();
  return out;
}

inline nlohmann::json model_to_json(const GcnParams &p) {
  p.validate();
  nlohmann::json j;
  j["format"] = "gcnmwis-model";
  j["version"] = p.version;
  j["dims"] = p.dims;
  j["leaky_slope"] = p.leaky_slope;
  j["layers"] = nlohmann::json::array();
  for (const auto &layer : p.layers) {
    nlohmann::json lj;
    for (const auto &[name, m] : {std::pair{"theta0", &layer.theta0}, std::pair{"theta1", &layer.theta1}}) {
      std::vector<double> flat;
      for (Eigen::Index r = 0; r < m->rows(); ++r)
        for (Eigen::Index c = 0; c < m->cols(); ++c) flat.push_back((*m)(r, c));
      lj[name] = flat;
    }
    j["layers"].push_back(std::move(lj));
  }
  return j;
}

inline GcnParams model_from_json(const nlohmann::json &j) {
  GcnParams p;
  try {
    if (j.at("format").get<std::string>() != "gcnmwis-model") throw ParseError("not a gcnmwis model file");
    p.version = j.at("version").get<int>();
    if (p.version != kModelVersion)
      throw ParseError("model version " + std::to_string(p.version) + " is not supported (expected " +
                       std::to_string(kModelVersion) + ")");
    p.dims = j.at("dims").get<std::vector<int>>();
    p.leaky_slope = j.at("leaky_slope").get<double>();
    const auto &layers = j.at("layers");
    if (!layers.is_array() || layers.size() + 1 != p.dims.size()) throw ParseError("layer count does not match dims");
    for (std::size_t l = 0; l < layers.size(); ++l) {
      GcnLayer layer;
      for (auto *target : {&layer.theta0, &layer.theta1}) {
        const auto flat = layers[l].at(target == &layer.theta0 ? "theta0" : "theta1").get<std::vector<double>>();
        if (p.dims[l] <= 0 || p.dims[l + 1] <= 0 ||
            flat.size() != static_cast<std::size_t>(p.dims[l]) * static_cast<std::size_t>(p.dims[l + 1]))
          throw ParseError("layer " + std::to_string(l) + " parameter count does not match dims");
        *target = Eigen::MatrixXd(p.dims[l], p.dims[l + 1]);
        std::size_t k = 0;
        for (Eigen::Index r = 0; r < target->rows(); ++r)
          for (Eigen::Index c = 0; c < target->cols(); ++c) (*target)(r, c) = flat[k++];
      }
      p.layers.push_back(std::move(layer));
    }
  } catch (const nlohmann::json::exception &e) {
    throw ParseError(std::string("malformed model: ") + e.what());
  }
  try {
    p.validate();
  } catch (const ParameterError &e) {
    throw ParseError(std::string("inconsistent model: ") + e.what());
  }
  return p;
}

inline void save_model(std::ostream &out, const GcnParams &p) { out << model_to_json(p).dump(2) << '\n'; }

inline GcnParams load_model(std::istream &in) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception &e) {
    throw ParseError(std::string("model file is not valid JSON: ") + e.what());
  }
  return model_from_json(j);
}

inline void save_model(const std::filesystem::path &path, const GcnParams &p) {
  write_file_atomically(path, [&](std::ostream &out) { save_model(out, p); });
}

inline GcnParams load_model(const std::filesystem::path &path) {
  auto in = open_for_reading(path);
  return load_model(in);
}

} // namespace gcnmwis
