#pragma once

// Approximation-ratio reports: per-instance records, per-bucket statistics and
// 0.01-wide histograms, written as CSV (tables) and JSON (aggregates).

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "gcnmwis/graph_io.hpp"

namespace gcnmwis {

inline constexpr std::size_t kHistogramBins = 100;

struct EvalRecord {
  std::string instance;
  std::size_t num_nodes = 0;
  /// Nominal expected degree of the generating model (bucket key).
  double average_degree = 0.0;
  std::string solver;
  double ratio = 0.0;
  int rounds = 0;
};

struct SummaryStats {
  std::size_t count = 0;
  double mean = 0.0;
  double median = 0.0;
  double stddev = 0.0;
};

inline SummaryStats summarize(std::vector<double> values) {
  SummaryStats s;
  s.count = values.size();
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  const auto mid = values.size() / 2;
  s.median = values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
  double sq = 0.0;
  for (double v : values) sq += (v - s.mean) * (v - s.mean);
  s.stddev = values.size() > 1 ? std::sqrt(sq / static_cast<double>(values.size() - 1)) : 0.0;
  return s;
}

/// Bin index of a ratio in [0, 1]; 1.0 lands in the last bin.
inline std::size_t histogram_bin(double ratio) {
  const auto b = static_cast<std::size_t>(std::floor(std::clamp(ratio, 0.0, 1.0) * kHistogramBins));
  return std::min(b, kHistogramBins - 1);
}

struct EvalReport {
  std::vector<EvalRecord> records;
  /// Instances excluded because the reference could not be computed.
  std::vector<std::string> flagged;

  std::vector<std::string> solvers() const {
    std::vector<std::string> out;
    for (const auto &r : records)
      if (std::find(out.begin(), out.end(), r.solver) == out.end()) out.push_back(r.solver);
    return out;
  }

  std::vector<double> ratios(const std::string &solver) const {
    std::vector<double> out;
    for (const auto &r : records)
      if (r.solver == solver) out.push_back(r.ratio);
    return out;
  }

  double mean(const std::string &solver) const { return summarize(ratios(solver)).mean; }

  /// Statistics per (solver, N, nominal degree), in sorted key order.
  std::map<std::tuple<std::string, std::size_t, double>, SummaryStats> buckets() const {
    std::map<std::tuple<std::string, std::size_t, double>, std::vector<double>> groups;
    for (const auto &r : records) groups[{r.solver, r.num_nodes, r.average_degree}].push_back(r.ratio);
    std::map<std::tuple<std::string, std::size_t, double>, SummaryStats> out;
    for (auto &[key, values] : groups) out[key] = summarize(std::move(values));
    return out;
  }

  std::vector<std::size_t> histogram(const std::string &solver) const {
    std::vector<std::size_t> bins(kHistogramBins, 0);
    for (const auto &r : records)
      if (r.solver == solver) ++bins[histogram_bin(r.ratio)];
    return bins;
  }

  void write_records_csv(std::ostream &out) const {
    out << "instance,num_nodes,average_degree,solver,ratio,rounds\n";
    for (const auto &r : records)
      out << r.instance << ',' << r.num_nodes << ',' << io_detail::real(r.average_degree) << ',' << r.solver << ','
          << io_detail::real(r.ratio) << ',' << r.rounds << '\n';
  }

  void write_histogram_csv(std::ostream &out) const {
    const auto names = solvers();
    out << "bin_lower,bin_upper";
    for (const auto &s : names) out << ',' << s;
    out << '\n';
    std::vector<std::vector<std::size_t>> hist;
    for (const auto &s : names) hist.push_back(histogram(s));
    for (std::size_t b = 0; b < kHistogramBins; ++b) {
      out << io_detail::real(static_cast<double>(b) / kHistogramBins) << ','
          << io_detail::real(static_cast<double>(b + 1) / kHistogramBins);
      for (const auto &h : hist) out << ',' << h[b];
      out << '\n';
    }
  }

  nlohmann::json summary_json() const {
    nlohmann::json j;
    j["instances_flagged"] = flagged.size();
    j["flagged"] = flagged;
    for (const auto &s : solvers()) {
      const auto st = summarize(ratios(s));
      j["overall"][s] = {{"count", st.count}, {"mean", st.mean}, {"median", st.median}, {"std", st.stddev}};
    }
    j["buckets"] = nlohmann::json::array();
    for (const auto &[key, st] : buckets()) {
      const auto &[solver, n, degree] = key;
      j["buckets"].push_back({{"solver", solver},
                              {"num_nodes", n},
                              {"average_degree", degree},
                              {"count", st.count},
                              {"mean", st.mean},
                              {"median", st.median},
                              {"std", st.stddev}});
    }
    return j;
  }
};

/// Rebuilds a report from the CSV written by write_records_csv.
inline EvalReport read_records_csv(std::istream &in) {
  EvalReport rep;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1) {
      if (line.rfind("instance,", 0) != 0) throw ParseError("missing records CSV header", lineno);
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      cells.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (cells.size() != 6) throw ParseError("expected 6 columns", lineno);
    EvalRecord r;
    r.instance = cells[0];
    r.num_nodes = io_detail::field<std::size_t>(cells[1], lineno, "num_nodes");
    r.average_degree = io_detail::field<double>(cells[2], lineno, "average_degree");
    r.solver = cells[3];
    r.ratio = io_detail::field<double>(cells[4], lineno, "ratio");
    r.rounds = io_detail::field<int>(cells[5], lineno, "rounds");
    rep.records.push_back(std::move(r));
  }
  return rep;
}

} // namespace gcnmwis
