#pragma once

// Line-oriented text format:
//
//   n <num_nodes>
//   e <i> <j>          one per edge, i < j
//   w <i> <value>      optional, one per node when present
//   pos <i> <x> <y>    network files only
//   radii <link> <interference>   network files only
//
// Blank lines and lines starting with '#' are ignored. Reals are written in
// shortest round-trip form so that load(save(x)) is bit-exact.

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gcnmwis/graph.hpp"
#include "gcnmwis/network.hpp"

namespace gcnmwis {

namespace io_detail {

inline std::string real(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

template <typename T>
T field(std::string_view tok, std::size_t line, std::string_view what) {
  T value{};
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    throw ParseError("bad " + std::string(what) + " '" + std::string(tok) + "'", line);
  return value;
}

struct RawFile {
  std::size_t num_nodes = 0;
  std::vector<std::pair<NodeId, NodeId>> edges;
  std::vector<std::optional<double>> weights;
  std::vector<std::optional<Point>> positions;
  std::optional<std::pair<double, double>> radii;
  bool any_weight = false;
  bool any_position = false;
};

inline RawFile parse(std::istream &in, bool allow_network_lines) {
  RawFile f;
  bool have_header = false;
  std::string text;
  std::size_t lineno = 0;
  auto node_index = [&](std::string_view tok) {
    const auto v = field<long long>(tok, lineno, "node id");
    if (v < 0 || static_cast<std::size_t>(v) >= f.num_nodes)
      throw ParseError("node id " + std::string(tok) + " out of range", lineno);
    return static_cast<NodeId>(v);
  };
  while (std::getline(in, text)) {
    ++lineno;
    const auto tok = split_ws(text);
    if (tok.empty() || tok[0].front() == '#') continue;
    const auto key = tok[0];
    auto expect = [&](std::size_t count) {
      if (tok.size() != count)
        throw ParseError("'" + std::string(key) + "' line needs " + std::to_string(count - 1) + " fields", lineno);
    };
    if (key == "n") {
      expect(2);
      if (have_header) throw ParseError("duplicate header", lineno);
      const auto n = field<long long>(tok[1], lineno, "node count");
      if (n < 0) throw ParseError("negative node count", lineno);
      f.num_nodes = static_cast<std::size_t>(n);
      f.weights.assign(f.num_nodes, std::nullopt);
      f.positions.assign(f.num_nodes, std::nullopt);
      have_header = true;
      continue;
    }
    if (!have_header) throw ParseError("expected 'n <num_nodes>' header before '" + std::string(key) + "'", lineno);
    if (key == "e") {
      expect(3);
      const NodeId a = node_index(tok[1]);
      const NodeId b = node_index(tok[2]);
      if (a >= b) throw ParseError("edge must be written with i < j", lineno);
      f.edges.emplace_back(a, b);
    } else if (key == "w") {
      expect(3);
      const NodeId a = node_index(tok[1]);
      if (f.weights[a]) throw ParseError("duplicate weight for node " + std::to_string(a), lineno);
      f.weights[a] = field<double>(tok[2], lineno, "weight");
      f.any_weight = true;
    } else if (allow_network_lines && key == "pos") {
      expect(4);
      const NodeId a = node_index(tok[1]);
      if (f.positions[a]) throw ParseError("duplicate position for node " + std::to_string(a), lineno);
      f.positions[a] = Point{field<double>(tok[2], lineno, "coordinate"), field<double>(tok[3], lineno, "coordinate")};
      f.any_position = true;
    } else if (allow_network_lines && key == "radii") {
      expect(3);
      f.radii = std::pair{field<double>(tok[1], lineno, "radius"), field<double>(tok[2], lineno, "radius")};
    } else {
      throw ParseError("unknown record '" + std::string(key) + "'", lineno);
    }
  }
  if (!have_header) throw ParseError("missing 'n <num_nodes>' header");
  return f;
}

} // namespace io_detail

struct GraphFile {
  Graph graph;
  std::optional<NodeUtilities> weights;
};

inline void save_graph(std::ostream &out, const Graph &g, const std::optional<NodeUtilities> &weights = {}) {
  if (weights && weights->size() != g.num_nodes()) throw DimensionError("weight vector does not match graph");
  out << "n " << g.num_nodes() << '\n';
  for (auto [a, b] : g.edges()) out << "e " << a << ' ' << b << '\n';
  if (weights)
    for (std::size_t i = 0; i < weights->size(); ++i) out << "w " << i << ' ' << io_detail::real((*weights)[i]) << '\n';
}

inline GraphFile load_graph(std::istream &in) {
  auto raw = io_detail::parse(in, false);
  GraphFile out;
  out.graph = Graph::from_edges(raw.num_nodes, raw.edges);
  if (out.graph.num_edges() != raw.edges.size()) throw ParseError("duplicate edge");
  if (raw.any_weight) {
    NodeUtilities w(raw.num_nodes);
    for (std::size_t i = 0; i < raw.num_nodes; ++i) {
      if (!raw.weights[i]) throw ParseError("missing weight for node " + std::to_string(i));
      w[i] = *raw.weights[i];
    }
    out.weights = std::move(w);
  }
  return out;
}

/// Writes to a temporary sibling and renames over the destination.
template <typename Writer>
void write_file_atomically(const std::filesystem::path &path, Writer &&write) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    write(out);
    out.flush();
    if (!out) throw IoError("write to " + tmp.string() + " failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

inline std::ifstream open_for_reading(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

inline void save_graph(const std::filesystem::path &path, const Graph &g,
                       const std::optional<NodeUtilities> &weights = {}) {
  write_file_atomically(path, [&](std::ostream &out) { save_graph(out, g, weights); });
}

inline GraphFile load_graph(const std::filesystem::path &path) {
  auto in = open_for_reading(path);
  return load_graph(in);
}

/// Network files store the connectivity graph (wireless nodes and links) plus
/// node positions; the conflict graph is re-derived on load.
inline void save_network(std::ostream &out, const WirelessNetwork &net) {
  out << "n " << net.positions.size() << '\n';
  out << "radii " << io_detail::real(net.link_radius) << ' ' << io_detail::real(net.interference_radius) << '\n';
  for (std::size_t i = 0; i < net.positions.size(); ++i)
    out << "pos " << i << ' ' << io_detail::real(net.positions[i].x) << ' ' << io_detail::real(net.positions[i].y)
        << '\n';
  for (auto [a, b] : net.links) out << "e " << a << ' ' << b << '\n';
}

inline WirelessNetwork load_network(std::istream &in) {
  auto raw = io_detail::parse(in, true);
  if (!raw.radii) throw ParseError("network file needs a 'radii' record");
  std::vector<Point> pos(raw.num_nodes);
  double side = 0.0;
  for (std::size_t i = 0; i < raw.num_nodes; ++i) {
    if (!raw.positions[i]) throw ParseError("missing position for node " + std::to_string(i));
    pos[i] = *raw.positions[i];
    side = std::max({side, pos[i].x, pos[i].y});
  }
  auto net = make_network(std::move(pos), side, raw.radii->first, raw.radii->second);
  auto stored = raw.edges;
  std::sort(stored.begin(), stored.end());
  if (stored != net.links) throw ParseError("stored links disagree with positions and link radius");
  return net;
}

inline void save_network(const std::filesystem::path &path, const WirelessNetwork &net) {
  write_file_atomically(path, [&](std::ostream &out) { save_network(out, net); });
}

inline WirelessNetwork load_network(const std::filesystem::path &path) {
  auto in = open_for_reading(path);
  return load_network(in);
}

} // namespace gcnmwis
