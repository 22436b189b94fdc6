#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "gcnmwis/graph.hpp"
#include "gcnmwis/network.hpp"
#include "gcnmwis/rng.hpp"

namespace gcnmwis {

/// Erdős–Rényi G(n, p): every unordered pair is an edge independently with
/// probability p. Pairs are visited in lexicographic order, one draw each.
inline Graph gen_er(std::size_t n, double p, std::uint64_t seed) {
  if (n == 0) throw ParameterError("ER graph needs n >= 1");
  if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("ER edge probability must lie in [0, 1]");
  Rng rng(seed);
  std::vector<std::pair<NodeId, NodeId>> edges;
  const auto nn = static_cast<NodeId>(n);
  for (NodeId i = 0; i < nn; ++i)
    for (NodeId j = i + 1; j < nn; ++j)
      if (rng.bernoulli(p)) edges.emplace_back(i, j);
  return Graph::from_edges(n, edges);
}

namespace detail {

/// Fenwick tree over integer weights, for proportional sampling.
class FenwickSampler {
public:
  explicit FenwickSampler(std::size_t n) : tree_(n + 1, 0), values_(n, 0) {}

  void add(std::size_t i, std::int64_t delta) {
    values_[i] += delta;
    total_ += delta;
    for (std::size_t k = i + 1; k < tree_.size(); k += k & (~k + 1)) tree_[k] += delta;
  }

  std::int64_t value(std::size_t i) const { return values_[i]; }
  std::int64_t total() const { return total_; }

  /// Index whose cumulative weight range contains `target` in [0, total).
  std::size_t find(std::int64_t target) const {
    std::size_t pos = 0;
    std::size_t step = 1;
    while (step * 2 < tree_.size()) step *= 2;
    for (; step > 0; step /= 2) {
      if (pos + step < tree_.size() && tree_[pos + step] <= target) {
        pos += step;
        target -= tree_[pos];
      }
    }
    return pos;
  }

private:
  std::vector<std::int64_t> tree_;
  std::vector<std::int64_t> values_;
  std::int64_t total_ = 0;
};

} // namespace detail

/// Barabási–Albert preferential attachment. Nodes 0..m-1 start isolated;
/// node m links to all of them; every later node links to m distinct existing
/// nodes drawn without replacement with probability proportional to degree + 1.
/// Always produces m * (n - m) edges.
inline Graph gen_ba(std::size_t n, std::size_t m, std::uint64_t seed) {
  if (m == 0 || m >= n) throw ParameterError("BA graph needs 1 <= m < n");
  Rng rng(seed);
  detail::FenwickSampler sampler(n);
  std::vector<std::pair<NodeId, NodeId>> edges;
  edges.reserve(m * (n - m));
  for (std::size_t v = 0; v < m; ++v) sampler.add(v, 1);

  std::vector<std::size_t> targets;
  std::vector<std::int64_t> removed;
  for (std::size_t v = m; v < n; ++v) {
    targets.clear();
    removed.clear();
    if (v == m) {
      for (std::size_t t = 0; t < m; ++t) targets.push_back(t);
    } else {
      for (std::size_t k = 0; k < m; ++k) {
        const auto r = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(sampler.total())));
        const auto t = sampler.find(r);
        targets.push_back(t);
        removed.push_back(sampler.value(t));
        sampler.add(t, -removed.back()); // without replacement
      }
      for (std::size_t k = 0; k < m; ++k) sampler.add(targets[k], removed[k]);
    }
    for (std::size_t t : targets) {
      edges.emplace_back(static_cast<NodeId>(t), static_cast<NodeId>(v));
      sampler.add(t, 1);
    }
    sampler.add(v, 1 + static_cast<std::int64_t>(m));
  }
  return Graph::from_edges(n, edges);
}

/// Rounds an expected average degree N*p to a BA attachment count: half up,
/// clamped to [1, n-1].
inline std::size_t ba_attachment_count(std::size_t n, double average_degree) {
  const double r = std::floor(average_degree + 0.5);
  const double hi = static_cast<double>(n) - 1.0;
  return static_cast<std::size_t>(std::clamp(r, 1.0, std::max(1.0, hi)));
}

struct ErModel {
  std::size_t n = 0;
  double p = 0.0;
};
struct BaModel {
  std::size_t n = 0;
  std::size_t m = 1;
};
struct GeometricModel {
  std::size_t n = 100;
  double area = 250.0;
  double link_radius = 1.0;
  double interference_radius = 4.0;
};

/// A random graph model plus seed, e.g. `er:n=100,p=0.05,seed=7`,
/// `ba:n=100,m=3,seed=1` or `geo:n=100,area=250,link=1,interference=4,seed=2`.
struct GeneratorSpec {
  std::variant<ErModel, BaModel, GeometricModel> model;
  std::uint64_t seed = 0;

  static GeneratorSpec parse(std::string_view text);
  std::string to_string() const;
};

namespace detail {

inline std::map<std::string, std::string> parse_kv_list(std::string_view body, std::string_view context) {
  std::map<std::string, std::string> kv;
  while (!body.empty()) {
    const auto comma = body.find(',');
    const auto item = body.substr(0, comma);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos || eq == 0)
      throw ParameterError("bad token '" + std::string(item) + "' in '" + std::string(context) + "'");
    kv.emplace(std::string(item.substr(0, eq)), std::string(item.substr(eq + 1)));
    if (comma == std::string_view::npos) break;
    body.remove_prefix(comma + 1);
  }
  return kv;
}

template <typename T>
T parse_number(const std::string &text, std::string_view key) {
  T value{};
  const auto *end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end)
    throw ParameterError("bad value '" + text + "' for '" + std::string(key) + "'");
  return value;
}

template <typename T>
T take(std::map<std::string, std::string> &kv, const std::string &key, std::optional<T> fallback = {}) {
  auto it = kv.find(key);
  if (it == kv.end()) {
    if (fallback) return *fallback;
    throw ParameterError("missing '" + key + "'");
  }
  T v = parse_number<T>(it->second, key);
  kv.erase(it);
  return v;
}

inline std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

} // namespace detail

inline GeneratorSpec GeneratorSpec::parse(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw ParameterError("generator spec needs 'model:' prefix: " + std::string(text));
  const auto kind = text.substr(0, colon);
  auto kv = detail::parse_kv_list(text.substr(colon + 1), text);
  const std::map<std::string_view, std::vector<std::string_view>> allowed{
      {"er", {"n", "p", "seed"}}, {"ba", {"n", "m", "seed"}}, {"geo", {"n", "area", "link", "interference", "seed"}}};
  if (const auto it = allowed.find(kind); it != allowed.end())
    for (const auto &[key, value] : kv)
      if (std::find(it->second.begin(), it->second.end(), key) == it->second.end())
        throw ParameterError("unknown key '" + key + "' in " + std::string(text));
  GeneratorSpec spec;
  spec.seed = detail::take<std::uint64_t>(kv, "seed", std::uint64_t{0});
  if (kind == "er") {
    ErModel m;
    m.n = detail::take<std::size_t>(kv, "n");
    m.p = detail::take<double>(kv, "p");
    if (m.n == 0 || !(m.p >= 0.0 && m.p <= 1.0)) throw ParameterError("invalid ER parameters in " + std::string(text));
    spec.model = m;
  } else if (kind == "ba") {
    BaModel m;
    m.n = detail::take<std::size_t>(kv, "n");
    m.m = detail::take<std::size_t>(kv, "m");
    if (m.m == 0 || m.m >= m.n) throw ParameterError("invalid BA parameters in " + std::string(text));
    spec.model = m;
  } else if (kind == "geo") {
    GeometricModel m;
    m.n = detail::take<std::size_t>(kv, "n", std::size_t{100});
    m.area = detail::take<double>(kv, "area", 250.0);
    m.link_radius = detail::take<double>(kv, "link", 1.0);
    m.interference_radius = detail::take<double>(kv, "interference", 4.0);
    if (m.n == 0 || !(m.area > 0) || !(m.link_radius > 0) || !(m.interference_radius > 0))
      throw ParameterError("invalid geometric parameters in " + std::string(text));
    spec.model = m;
  } else {
    throw ParameterError("unknown graph model '" + std::string(kind) + "'");
  }
  if (!kv.empty()) throw ParameterError("unknown key '" + kv.begin()->first + "' in " + std::string(text));
  return spec;
}

inline std::string GeneratorSpec::to_string() const {
  using detail::format_double;
  std::string body;
  if (const auto *er = std::get_if<ErModel>(&model))
    body = "er:n=" + std::to_string(er->n) + ",p=" + format_double(er->p);
  else if (const auto *ba = std::get_if<BaModel>(&model))
    body = "ba:n=" + std::to_string(ba->n) + ",m=" + std::to_string(ba->m);
  else {
    const auto &geo = std::get<GeometricModel>(model);
    body = "geo:n=" + std::to_string(geo.n) + ",area=" + format_double(geo.area) +
           ",link=" + format_double(geo.link_radius) + ",interference=" + format_double(geo.interference_radius);
  }
  return body + ",seed=" + std::to_string(seed);
}

/// Materializes the spec. The geometric model yields the conflict graph.
inline Graph generate(const GeneratorSpec &spec) {
  if (const auto *er = std::get_if<ErModel>(&spec.model)) return gen_er(er->n, er->p, spec.seed);
  if (const auto *ba = std::get_if<BaModel>(&spec.model)) return gen_ba(ba->n, ba->m, spec.seed);
  const auto &geo = std::get<GeometricModel>(spec.model);
  return gen_network(geo.n, geo.area, geo.link_radius, geo.interference_radius, spec.seed).conflict_graph;
}

} // namespace gcnmwis
