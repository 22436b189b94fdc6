// gcnmwis command-line driver: dataset generation, training, evaluation
// against the exact solver, wireless scheduling simulation and reports.
// Every command leaves a manifest.json next to its outputs; `rerun` replays
// one.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "gcnmwis/gcn.hpp"
#include "gcnmwis/generators.hpp"
#include "gcnmwis/graph_io.hpp"
#include "gcnmwis/mwis.hpp"
#include "gcnmwis/report.hpp"
#include "gcnmwis/trainer.hpp"
#include "gcnmwis/wireless_sim.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace gcnmwis;

namespace {

constexpr const char *kToolVersion = "0.1.0";

enum ExitCode { kOk = 0, kOther = 1, kUsage = 2, kIo = 3, kNumeric = 4, kBudget = 5 };

struct UsageError : Error {
  using Error::Error;
};

fs::path default_out_dir() {
  if (const char *env = std::getenv("GCNMWIS_OUT"); env && *env) return env;
  return "gcnmwis-out";
}

void write_text(const fs::path &path, const std::string &text) {
  write_file_atomically(path, [&](std::ostream &out) { out << text; });
}

void write_json(const fs::path &path, const json &j) { write_text(path, j.dump(2) + "\n"); }

json read_json(const fs::path &path) {
  auto in = open_for_reading(path);
  try {
    return json::parse(in);
  } catch (const json::exception &e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

template <typename Fn>
std::string render(Fn &&fn) {
  std::ostringstream out;
  fn(out);
  return out.str();
}

std::string zero_pad(std::size_t i, std::size_t width) {
  std::ostringstream s;
  s << std::setw(static_cast<int>(width)) << std::setfill('0') << i;
  return s.str();
}

SolverBudget make_budget(std::uint64_t max_nodes, double time_limit) {
  SolverBudget b;
  b.max_branch_nodes = max_nodes;
  if (time_limit > 0) b.time_limit = std::chrono::duration<double>(time_limit);
  else b.time_limit.reset();
  return b;
}

/// Collects artifact paths and the resolved configuration of one run.
struct Manifest {
  std::string command;
  std::vector<std::string> args;
  json config = json::object();
  json seeds = json::object();
  std::vector<std::string> artifacts; // relative to root
  fs::path root;

  void add(const fs::path &p) { artifacts.push_back(p.lexically_normal().lexically_relative(root).string()); }

  void write(const fs::path &dir, double seconds) const {
    write_json(dir / "manifest.json", {{"tool", "gcnmwis"},
                                       {"version", kToolVersion},
                                       {"command", command},
                                       {"args", args},
                                       {"config", config},
                                       {"seeds", seeds},
                                       {"artifacts", artifacts},
                                       {"duration_seconds", seconds}});
  }
};

void write_report(const EvalReport &rep, const fs::path &out, Manifest &m) {
  write_text(out / "records.csv", render([&](std::ostream &o) { rep.write_records_csv(o); }));
  write_json(out / "summary.json", rep.summary_json());
  write_text(out / "histogram.csv", render([&](std::ostream &o) { rep.write_histogram_csv(o); }));
  for (const char *name : {"records.csv", "summary.json", "histogram.csv"}) m.add(out / name);
}

void print_means(const EvalReport &rep) {
  for (const auto &s : rep.solvers()) {
    const auto st = summarize(rep.ratios(s));
    std::cerr << "  " << std::left << std::setw(8) << s << " mean " << std::fixed << std::setprecision(4) << st.mean
              << "  median " << st.median << "  n=" << st.count << '\n';
  }
  if (!rep.flagged.empty()) std::cerr << "  flagged instances: " << rep.flagged.size() << '\n';
}

DatasetSpec resolve_dataset(const json &j) {
  if (j.is_string()) {
    const auto name = j.get<std::string>();
    if (fs::exists(name)) return dataset_spec_from_json(read_json(name));
    return DatasetSpec::preset(name);
  }
  return dataset_spec_from_json(j);
}

std::vector<Instance> load_instances(const fs::path &dir) {
  std::vector<fs::path> files;
  for (const auto &e : fs::directory_iterator(dir))
    if (e.path().extension() == ".graph") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw IoError("no .graph files in " + dir.string());
  std::vector<Instance> out;
  for (const auto &f : files) {
    auto gf = load_graph(f);
    if (!gf.weights) throw ParseError(f.string() + ": graph file carries no utilities");
    const double degree = gf.graph.average_degree();
    out.push_back({f.stem().string(), std::move(gf.graph), std::move(*gf.weights), degree});
  }
  return out;
}

// ---------------------------------------------------------------------------
// generate

struct GenerateArgs {
  std::string spec, dataset, preset;
  std::uint64_t seed = 0;
  std::string out;
};

void cmd_generate(const GenerateArgs &a, Manifest &m) {
  const fs::path out = a.out;
  fs::create_directories(out);
  const int sources = !a.spec.empty() + !a.dataset.empty() + !a.preset.empty();
  if (sources != 1) throw UsageError("generate needs exactly one of --spec, --dataset, --preset");
  m.seeds["seed"] = a.seed;
  if (!a.spec.empty()) {
    // Peel off count=K, the rest is a single-graph generator spec.
    std::string body = a.spec;
    std::size_t count = 1;
    const auto colon = body.find(':');
    if (colon == std::string::npos) throw UsageError("bad spec '" + a.spec + "': expected model:key=value,...");
    auto kv = detail::parse_kv_list(std::string_view(body).substr(colon + 1), body);
    std::string rest = body.substr(0, colon + 1);
    bool first = true;
    for (const auto &[k, v] : kv) {
      if (k == "count") {
        count = detail::parse_number<std::size_t>(v, k);
        continue;
      }
      rest += (first ? "" : ",") + k + "=" + v;
      first = false;
    }
    const auto base = GeneratorSpec::parse(rest);
    m.config = {{"spec", base.to_string()}, {"count", count}};
    m.seeds["seed"] = base.seed;
    const auto width = std::to_string(count).size();
    for (std::size_t i = 0; i < count; ++i) {
      auto spec = base;
      spec.seed = derive_seed(base.seed, i);
      if (const auto *geo = std::get_if<GeometricModel>(&spec.model)) {
        const auto net = gen_network(geo->n, geo->area, geo->link_radius, geo->interference_radius, spec.seed);
        const auto path = out / ("net-" + zero_pad(i, width) + ".network");
        save_network(path, net);
        m.add(path);
        continue;
      }
      const Graph g = generate(spec);
      Rng rng(derive_seed(spec.seed, 0x75746c));
      NodeUtilities u(g.num_nodes());
      for (auto &x : u) x = rng.uniform();
      const auto path = out / ("graph-" + zero_pad(i, width) + ".graph");
      save_graph(path, g, u);
      m.add(path);
    }
    return;
  }
  const auto spec = a.preset.empty() ? dataset_spec_from_json(read_json(a.dataset)) : DatasetSpec::preset(a.preset);
  m.config = {{"dataset", dataset_spec_to_json(spec)}};
  const auto set = generate_training_set(spec, a.seed);
  for (const auto &inst : set) {
    const auto path = out / (inst.id + ".graph");
    save_graph(path, inst.graph, inst.utilities);
    m.add(path);
  }
  std::cerr << "wrote " << set.size() << " graphs to " << out.string() << '\n';
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string config, dataset, data_dir, init_model, out, dims;
  std::optional<std::uint64_t> dataset_seed, init_seed, seed;
  std::optional<int> epochs, reset_period;
  std::optional<std::size_t> batch_size, updates_per_epoch;
  std::optional<double> lr0, lr_decay;
  std::string reward_mode;
  bool dry_run = false;
  unsigned jobs = 1;
};

std::vector<int> parse_dims(const std::string &text) {
  std::vector<int> dims;
  std::stringstream s(text);
  std::string item;
  while (std::getline(s, item, ','))
    dims.push_back(detail::parse_number<int>(item, "dims"));
  return dims;
}

void cmd_train(const TrainArgs &a, Manifest &m) {
  const fs::path out = a.out;
  fs::create_directories(out / "checkpoints");
  json cfg = a.config.empty() ? json::object() : read_json(a.config);

  TrainConfig tc = train_config_from_json(cfg.value("train", json::object()));
  if (a.seed) tc.seed = *a.seed;
  if (a.epochs) tc.epochs = *a.epochs;
  if (a.reset_period) tc.reset_period = *a.reset_period;
  if (a.batch_size) tc.batch_size = *a.batch_size;
  if (a.updates_per_epoch) tc.updates_per_epoch = *a.updates_per_epoch;
  if (a.lr0) tc.lr0 = *a.lr0;
  if (a.lr_decay) tc.lr_decay = *a.lr_decay;
  if (!a.reward_mode.empty()) tc.reward_mode = reward_mode_from_string(a.reward_mode);
  tc.jobs = a.jobs;
  tc.validate();

  std::vector<Instance> data;
  json data_cfg;
  std::uint64_t dataset_seed = a.dataset_seed.value_or(cfg.value("dataset_seed", std::uint64_t{0}));
  if (!a.data_dir.empty() || cfg.contains("data_dir")) {
    const fs::path dir = a.data_dir.empty() ? fs::path(cfg["data_dir"].get<std::string>()) : fs::path(a.data_dir);
    data = load_instances(dir);
    data_cfg = {{"data_dir", fs::absolute(dir).lexically_normal().string()}};
  } else {
    const auto spec = resolve_dataset(a.dataset.empty() ? cfg.value("dataset", json("desk-train")) : json(a.dataset));
    data = generate_training_set(spec, dataset_seed);
    data_cfg = {{"dataset", dataset_spec_to_json(spec)}, {"dataset_seed", dataset_seed}};
  }

  const json model_cfg = cfg.value("model", json::object());
  GcnParams init;
  json init_cfg;
  if (!a.init_model.empty()) {
    init = load_model(fs::path(a.init_model));
    init_cfg = {{"init_model", fs::absolute(a.init_model).lexically_normal().string()}};
  } else {
    const auto dims = a.dims.empty() ? model_cfg.value("dims", std::vector<int>{1, 1}) : parse_dims(a.dims);
    const double slope = model_cfg.value("leaky_slope", 0.01);
    const auto init_seed = a.init_seed.value_or(model_cfg.value("init_seed", tc.seed));
    init = glorot_init(dims, slope, init_seed);
    init_cfg = {{"dims", dims}, {"leaky_slope", slope}, {"init_seed", init_seed}};
  }

  m.config = {{"train", train_config_to_json(tc)}, {"data", data_cfg}, {"model", init_cfg}, {"dry_run", a.dry_run}};
  m.seeds = {{"train", tc.seed}, {"dataset", dataset_seed}};
  if (init_cfg.contains("init_seed")) m.seeds["init"] = init_cfg["init_seed"];

  std::cerr << "training on " << data.size() << " graphs, " << tc.epochs << " epochs, reward mode "
            << to_string(tc.reward_mode) << '\n';
  if (a.dry_run) tc.epochs = 0;
  TrainResult result;
  try {
    result = train(tc, data, init, [&](const EpochStats &e, const GcnParams &p) {
      const auto path = out / "checkpoints" / ("epoch-" + zero_pad(static_cast<std::size_t>(e.epoch), 3) + ".json");
      save_model(path, p);
      m.add(path);
      std::cerr << "  epoch " << std::setw(3) << e.epoch << "  loss " << std::fixed << std::setprecision(5)
                << e.mean_loss << "  ratio/greedy " << e.mean_ratio_vs_greedy << "  lr " << std::scientific
                << std::setprecision(3) << e.lr << std::defaultfloat << '\n';
    });
  } catch (const TrainingDiverged &e) {
    save_model(out / "model.last-finite.json", e.last_good());
    m.add(out / "model.last-finite.json");
    throw;
  }
  save_model(out / "model.json", result.params);
  write_text(out / "history.csv", render([&](std::ostream &o) { result.history.write_csv(o); }));
  m.add(out / "model.json");
  m.add(out / "history.csv");
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  std::string model, testset, data_dir, out;
  std::uint64_t seed = 0;
  std::uint64_t max_nodes = SolverBudget{}.max_branch_nodes;
  double time_limit = 60.0;
  bool no_normalize = false;
  unsigned jobs = 1;
};

void cmd_eval(const EvalArgs &a, Manifest &m) {
  const fs::path out = a.out;
  fs::create_directories(out);
  const auto params = load_model(fs::path(a.model));
  std::vector<Instance> test;
  json data_cfg;
  if (!a.data_dir.empty()) {
    test = load_instances(a.data_dir);
    data_cfg = {{"data_dir", fs::absolute(a.data_dir).lexically_normal().string()}};
  } else {
    const auto spec = resolve_dataset(json(a.testset.empty() ? "desk-test" : a.testset));
    test = generate_training_set(spec, a.seed);
    data_cfg = {{"dataset", dataset_spec_to_json(spec)}, {"dataset_seed", a.seed}};
  }
  m.config = {{"model", fs::absolute(a.model).lexically_normal().string()},
              {"data", data_cfg},
              {"max_branch_nodes", a.max_nodes},
              {"time_limit", a.time_limit},
              {"normalize", !a.no_normalize}};
  m.seeds = {{"dataset", a.seed}};
  std::cerr << "evaluating on " << test.size() << " instances\n";
  const auto rep = evaluate(params, test, {make_budget(a.max_nodes, a.time_limit), !a.no_normalize, a.jobs});
  write_report(rep, out, m);
  print_means(rep);
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  std::string model, out, trace_dir;
  std::vector<std::string> network_files;
  std::size_t networks = 25, nodes = 100;
  double area = 250.0, link_radius = 1.0, interference_radius = 4.0;
  int slots = 200, instances = 10, warmup = 0;
  double lambda = kDefaultArrivalRate;
  std::uint64_t seed = 0;
  std::uint64_t max_nodes = SolverBudget{}.max_branch_nodes;
  double time_limit = 60.0;
  unsigned jobs = 1;
};

void cmd_simulate(const SimulateArgs &a, Manifest &m) {
  const fs::path out = a.out;
  fs::create_directories(out);
  std::vector<WirelessNetwork> nets;
  json net_cfg;
  if (!a.network_files.empty()) {
    std::vector<std::string> abs;
    for (const auto &f : a.network_files) {
      nets.push_back(load_network(fs::path(f)));
      abs.push_back(fs::absolute(f).lexically_normal().string());
    }
    net_cfg = {{"files", abs}};
  } else {
    for (std::size_t i = 0; i < a.networks; ++i)
      nets.push_back(gen_network(a.nodes, a.area, a.link_radius, a.interference_radius, derive_seed(a.seed, 1000 + i)));
    net_cfg = {{"count", a.networks},
               {"nodes", a.nodes},
               {"area", a.area},
               {"link_radius", a.link_radius},
               {"interference_radius", a.interference_radius}};
  }
  SimulationOptions opt;
  opt.slots = a.slots;
  opt.instances = a.instances;
  opt.arrival_rate = a.lambda;
  opt.warmup = a.warmup;
  opt.seed = a.seed;
  opt.budget = make_budget(a.max_nodes, a.time_limit);
  opt.jobs = a.jobs;
  opt.report_reference = true;

  std::vector<NamedScheduler> cands{{"greedy", greedy_scheduler()}};
  if (!a.model.empty()) cands.emplace_back("gcn", gcn_scheduler(load_model(fs::path(a.model))));
  m.config = {{"networks", net_cfg},
              {"slots", a.slots},
              {"instances", a.instances},
              {"lambda", a.lambda},
              {"warmup", a.warmup},
              {"max_branch_nodes", a.max_nodes},
              {"time_limit", a.time_limit},
              {"model", a.model.empty() ? json(nullptr) : json(fs::absolute(a.model).lexically_normal().string())}};
  m.seeds = {{"seed", a.seed}};
  std::cerr << "simulating " << nets.size() << " networks x " << a.instances << " instances x " << a.slots
            << " slots\n";
  const auto rep = compare_schedulers(nets, cands, opt);
  write_report(rep, out, m);
  print_means(rep);

  if (!a.trace_dir.empty()) {
    const fs::path dir = a.trace_dir;
    fs::create_directories(dir);
    cands.emplace_back("exact", exact_scheduler(opt.budget));
    for (std::size_t i = 0; i < nets.size(); ++i)
      for (int k = 0; k < a.instances; ++k)
        for (const auto &[name, sched] : cands) {
          const auto trace = run_instance(nets[i], sched, a.slots, a.lambda, instance_seed(a.seed, i, k), a.warmup);
          const auto path = dir / ("net" + std::to_string(i) + "-run" + std::to_string(k) + "-" + name + ".csv");
          write_text(path, render([&](std::ostream &o) { trace.write_csv(o); }));
          m.add(path);
        }
  }
}

// ---------------------------------------------------------------------------
// solve and report

struct SolveArgs {
  std::string graph, solver = "exact", model, out;
  std::uint64_t max_nodes = SolverBudget{}.max_branch_nodes;
  double time_limit = 60.0;
};

void cmd_solve(const SolveArgs &a, Manifest &m) {
  const fs::path out = a.out;
  fs::create_directories(out);
  const auto gf = load_graph(fs::path(a.graph));
  if (!gf.weights) throw ParseError(a.graph + ": graph file carries no utilities");
  IndependentSet set;
  int rounds = 0;
  if (a.solver == "exact") {
    set = exact_mwis(gf.graph, *gf.weights, make_budget(a.max_nodes, a.time_limit));
  } else if (a.solver == "greedy") {
    auto r = local_greedy(gf.graph, *gf.weights);
    set = validate_set(gf.graph, r.set.members, *gf.weights);
    rounds = r.trace.total_rounds();
  } else if (a.solver == "gcn") {
    if (a.model.empty()) throw UsageError("--solver gcn needs --model");
    auto r = gcn_schedule(load_model(fs::path(a.model)), gf.graph, *gf.weights);
    set = r.set;
    rounds = r.trace.total_rounds();
  } else {
    throw UsageError("unknown solver '" + a.solver + "'");
  }
  m.config = {{"graph", fs::absolute(a.graph).lexically_normal().string()},
              {"solver", a.solver},
              {"max_branch_nodes", a.max_nodes},
              {"time_limit", a.time_limit}};
  write_text(out / "solution.txt", render([&](std::ostream &o) { write_solution(o, set, rounds); }));
  m.add(out / "solution.txt");
  write_solution(std::cout, set, rounds);
}

struct ReportArgs {
  std::string records, out;
};

void cmd_report(const ReportArgs &a, Manifest &m) {
  const fs::path out = a.out;
  fs::create_directories(out);
  auto in = open_for_reading(fs::path(a.records));
  const auto rep = read_records_csv(in);
  m.config = {{"records", fs::absolute(a.records).lexically_normal().string()}};
  write_json(out / "summary.json", rep.summary_json());
  write_text(out / "histogram.csv", render([&](std::ostream &o) { rep.write_histogram_csv(o); }));
  m.add(out / "summary.json");
  m.add(out / "histogram.csv");
  print_means(rep);
}

// ---------------------------------------------------------------------------

int run(std::vector<std::string> args);

int dispatch_errors(const std::function<void()> &body) {
  try {
    body();
    return kOk;
  } catch (const UsageError &e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const ParameterError &e) {
    std::cerr << "invalid parameter: " << e.what() << '\n';
    return kUsage;
  } catch (const BudgetExhausted &e) {
    std::cerr << e.what() << '\n';
    return kBudget;
  } catch (const ParseError &e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kIo;
  } catch (const IoError &e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const fs::filesystem_error &e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const NumericError &e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kNumeric;
  } catch (const UndefinedRatioError &e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kNumeric;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kOther;
  }
}

int run(std::vector<std::string> args) {
  CLI::App app{"GCN-weighted distributed MWIS scheduling: datasets, training, evaluation, simulation"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", kToolVersion);
  std::string out_dir;
  unsigned jobs = 1;
  app.add_option("-o,--out", out_dir, "Output directory (default: $GCNMWIS_OUT or ./gcnmwis-out)");
  app.add_option("-j,--jobs", jobs, "Worker threads")->check(CLI::Range(1u, 1024u));

  GenerateArgs gen;
  auto *generate_cmd = app.add_subcommand("generate", "Write random graphs (with utilities) to disk");
  generate_cmd->add_option("--spec", gen.spec, "Generator spec, e.g. er:n=30,p=0.2,count=10,seed=1");
  generate_cmd->add_option("--dataset", gen.dataset, "Dataset spec JSON file");
  generate_cmd->add_option("--preset", gen.preset, "full-train, full-test, desk-train, desk-test (suffix -ba for BA)");
  generate_cmd->add_option("--seed", gen.seed, "Dataset seed (--dataset / --preset)");

  TrainArgs tr;
  auto *train_cmd = app.add_subcommand("train", "Train the GCN with the greedy-relative reward");
  train_cmd->add_option("-c,--config", tr.config, "Training config JSON (keys: train, dataset, dataset_seed, model)");
  train_cmd->add_option("--dataset", tr.dataset, "Dataset preset name or spec JSON file");
  train_cmd->add_option("--data", tr.data_dir, "Directory of .graph files to train on instead");
  train_cmd->add_option("--dataset-seed", tr.dataset_seed);
  train_cmd->add_option("--init", tr.init_model, "Start from this model file");
  train_cmd->add_option("--dims", tr.dims, "Layer widths, e.g. 1,32,32,1 (default 1,1)");
  train_cmd->add_option("--init-seed", tr.init_seed);
  train_cmd->add_option("--seed", tr.seed, "Training seed");
  train_cmd->add_option("--epochs", tr.epochs);
  train_cmd->add_option("--batch-size", tr.batch_size);
  train_cmd->add_option("--updates-per-epoch", tr.updates_per_epoch, "0 = ceil(dataset / batch)");
  train_cmd->add_option("--lr", tr.lr0);
  train_cmd->add_option("--lr-decay", tr.lr_decay);
  train_cmd->add_option("--reset-period", tr.reset_period);
  train_cmd->add_option("--reward-mode", tr.reward_mode, "baseline_fill or selected_only");
  train_cmd->add_flag("--dry-run", tr.dry_run, "Validate inputs and write the initial model only");

  EvalArgs ev;
  auto *eval_cmd = app.add_subcommand("eval", "Approximation ratios of greedy and GCN against the exact solver");
  eval_cmd->add_option("-m,--model", ev.model, "Model file")->required();
  eval_cmd->add_option("--testset", ev.testset, "Dataset preset name or spec JSON file (default desk-test)");
  eval_cmd->add_option("--data", ev.data_dir, "Directory of .graph files instead of a generated test set");
  eval_cmd->add_option("--seed", ev.seed, "Test set seed");
  eval_cmd->add_option("--max-branch-nodes", ev.max_nodes);
  eval_cmd->add_option("--time-limit", ev.time_limit, "Seconds per instance, 0 = none");
  eval_cmd->add_flag("--no-normalize", ev.no_normalize, "Feed raw utilities to the GCN");

  SimulateArgs sim;
  auto *sim_cmd = app.add_subcommand("simulate", "Throughput of greedy and GCN schedulers against exact per-slot MWIS");
  sim_cmd->add_option("-m,--model", sim.model, "Model file (omit to compare greedy only)");
  sim_cmd->add_option("--network", sim.network_files, "Network file(s) instead of random networks");
  sim_cmd->add_option("--networks", sim.networks, "Number of random networks");
  sim_cmd->add_option("--nodes", sim.nodes);
  sim_cmd->add_option("--area", sim.area);
  sim_cmd->add_option("--link-radius", sim.link_radius);
  sim_cmd->add_option("--interference-radius", sim.interference_radius);
  sim_cmd->add_option("--slots", sim.slots);
  sim_cmd->add_option("--instances", sim.instances);
  sim_cmd->add_option("--lambda", sim.lambda, "Poisson arrival rate per link and slot");
  sim_cmd->add_option("--warmup", sim.warmup, "Slots excluded from throughput");
  sim_cmd->add_option("--seed", sim.seed);
  sim_cmd->add_option("--max-branch-nodes", sim.max_nodes);
  sim_cmd->add_option("--time-limit", sim.time_limit, "Seconds per slot, 0 = none");
  sim_cmd->add_option("--trace-dir", sim.trace_dir, "Write per-run slot traces here");

  SolveArgs sv;
  auto *solve_cmd = app.add_subcommand("solve", "Solve one weighted graph file");
  solve_cmd->add_option("graph", sv.graph)->required();
  solve_cmd->add_option("--solver", sv.solver, "exact, greedy or gcn");
  solve_cmd->add_option("-m,--model", sv.model);
  solve_cmd->add_option("--max-branch-nodes", sv.max_nodes);
  solve_cmd->add_option("--time-limit", sv.time_limit);

  ReportArgs rp;
  auto *report_cmd = app.add_subcommand("report", "Recompute summary and histogram from a records CSV");
  report_cmd->add_option("records", rp.records)->required();

  std::string manifest_path;
  auto *rerun_cmd = app.add_subcommand("rerun", "Replay the command recorded in a manifest");
  rerun_cmd->add_option("manifest", manifest_path)->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  if (rerun_cmd->parsed()) {
    return dispatch_errors([&] {
      const auto j = read_json(manifest_path);
      auto replay = j.at("args").get<std::vector<std::string>>();
      if (!out_dir.empty()) {
        for (std::size_t i = 0; i + 1 < replay.size(); ++i)
          if (replay[i] == "--out") replay[i + 1] = out_dir;
      }
      const int code = run(replay);
      if (code != kOk) throw Error("replayed command failed with exit code " + std::to_string(code));
    });
  }

  const fs::path out = out_dir.empty() ? default_out_dir() : fs::path(out_dir);
  Manifest m;
  m.root = out.lexically_normal();
  // Record the invocation with the output directory and job count pinned.
  std::vector<std::string> pinned{"--out", fs::absolute(out).lexically_normal().string()};
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "-o" || args[i] == "--out" || args[i] == "-j" || args[i] == "--jobs") {
      ++i;
      continue;
    }
    if (args[i].rfind("--out=", 0) == 0 || args[i].rfind("--jobs=", 0) == 0) continue;
    pinned.push_back(args[i]);
  }
  m.args = pinned;

  const auto start = std::chrono::steady_clock::now();
  const int code = dispatch_errors([&] {
    if (generate_cmd->parsed()) {
      m.command = "generate";
      gen.out = out.string();
      cmd_generate(gen, m);
    } else if (train_cmd->parsed()) {
      m.command = "train";
      tr.out = out.string();
      tr.jobs = jobs;
      cmd_train(tr, m);
    } else if (eval_cmd->parsed()) {
      m.command = "eval";
      ev.out = out.string();
      ev.jobs = jobs;
      cmd_eval(ev, m);
    } else if (sim_cmd->parsed()) {
      m.command = "simulate";
      sim.out = out.string();
      sim.jobs = jobs;
      cmd_simulate(sim, m);
    } else if (solve_cmd->parsed()) {
      m.command = "solve";
      sv.out = out.string();
      cmd_solve(sv, m);
    } else if (report_cmd->parsed()) {
      m.command = "report";
      rp.out = out.string();
      cmd_report(rp, m);
    }
  });
  if (!m.command.empty() && fs::is_directory(out)) {
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    m.config["exit_code"] = code;
    dispatch_errors([&] { m.write(out, secs); });
  }
  return code;
}

} // namespace

int main(int argc, char **argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(std::move(args));
}
