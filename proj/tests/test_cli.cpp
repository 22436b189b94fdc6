#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "gcnmwis/gcn.hpp"
#include "gcnmwis/graph_io.hpp"
#include "gcnmwis/network.hpp"
#include "gcnmwis/report.hpp"

namespace fs = std::filesystem;
using namespace gcnmwis;

namespace {

class Cli : public ::testing::Test {
protected:
  void SetUp() override {
    const auto *info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("gcnmwis-cli-" + std::string(info->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  // Runs the CLI, returning its exit code; stderr goes to dir_/stderr.txt.
  int run(const std::string &args, const std::string &env = "") const {
    const std::string cmd =
        env + " \"" GCNMWIS_CLI "\" " + args + " > \"" + (dir_ / "stdout.txt").string() + "\" 2> \"" + (dir_ / "stderr.txt").string() + "\"";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string out(const std::string &name) const { return (dir_ / name).string(); }

  static std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }

  std::string stderr_text() const { return slurp(dir_ / "stderr.txt"); }

  EvalReport records(const std::string &name) const {
    std::ifstream in(dir_ / name / "records.csv");
    return read_records_csv(in);
  }

  fs::path dir_;
};

std::size_t count_files(const fs::path &dir, const std::string &ext) {
  std::size_t n = 0;
  for (const auto &e : fs::directory_iterator(dir)) n += e.path().extension() == ext;
  return n;
}

} // namespace

TEST_F(Cli, GenerateWritesRequestedCountDeterministically) {
  ASSERT_EQ(run("generate --spec er:n=30,p=0.2,count=10,seed=1 --out " + out("a")), 0) << stderr_text();
  ASSERT_EQ(run("generate --spec er:n=30,p=0.2,count=10,seed=1 --out " + out("b")), 0);
  EXPECT_EQ(count_files(out("a"), ".graph"), 10u);
  for (const auto &e : fs::directory_iterator(out("a")))
    if (e.path().extension() == ".graph") EXPECT_EQ(slurp(e.path()), slurp(fs::path(out("b")) / e.path().filename()));
  const auto manifest = nlohmann::json::parse(slurp(fs::path(out("a")) / "manifest.json"));
  EXPECT_EQ(manifest["command"], "generate");
  EXPECT_EQ(manifest["artifacts"].size(), 10u);
}

TEST_F(Cli, GenerateFullTrainingSet) {
  ASSERT_EQ(run("generate --preset full-train --seed 2 --out " + out("full")), 0) << stderr_text();
  EXPECT_EQ(count_files(out("full"), ".graph"), 5800u);
}

TEST_F(Cli, BadSpecIsUsageErrorNamingToken) {
  EXPECT_EQ(run("generate --spec er:n=30,q=0.2 --out " + out("x")), 2);
  EXPECT_NE(stderr_text().find("'q'"), std::string::npos) << stderr_text();
  EXPECT_EQ(run("generate --spec er:n=30,p=abc --out " + out("x")), 2);
  EXPECT_NE(stderr_text().find("abc"), std::string::npos);
  EXPECT_EQ(run("frobnicate"), 2);
}

TEST_F(Cli, ExitCodesDistinguishFailureKinds) {
  EXPECT_EQ(run("eval -m " + out("missing.json") + " --out " + out("e")), 3);
  {
    std::ofstream bad(out("bad.json"));
    bad << "{ not json";
  }
  EXPECT_EQ(run("eval -m " + out("bad.json") + " --out " + out("e")), 3);
  ASSERT_EQ(run("generate --spec er:n=60,p=0.1,count=1,seed=3 --out " + out("g")), 0);
  EXPECT_EQ(run("solve " + out("g") + "/graph-0.graph --max-branch-nodes 1 --out " + out("s")), 5);
  EXPECT_EQ(run("solve " + out("g") + "/graph-0.graph --out " + out("s")), 0);
  EXPECT_EQ(run("train --dataset desk-test --epochs 1 --lr 1e308 --lr-decay 1 --updates-per-epoch 3 --out " + out("t")), 4)
      << stderr_text();
  EXPECT_TRUE(fs::exists(fs::path(out("t")) / "model.last-finite.json"));
}

TEST_F(Cli, TrainDryRunWritesInitialModel) {
  ASSERT_EQ(run("train --dry-run --init-seed 4 --out " + out("t")), 0) << stderr_text();
  EXPECT_EQ(load_model(fs::path(out("t")) / "model.json"), glorot_init({1, 1}, 0.01, 4));
  EXPECT_EQ(slurp(fs::path(out("t")) / "history.csv"), "epoch,mean_loss,mean_ratio_vs_greedy,lr\n");
}

TEST_F(Cli, TrainSmokeRunLowersLoss) {
  ASSERT_EQ(run("train --dataset desk-train --epochs 10 --lr 0.01 --updates-per-epoch 10 --batch-size 50 --out " +
                out("t")),
            0)
      << stderr_text();
  std::ifstream in(fs::path(out("t")) / "history.csv");
  std::string line;
  std::vector<double> loss;
  std::getline(in, line);
  while (std::getline(in, line)) {
    const auto a = line.find(',');
    loss.push_back(std::stod(line.substr(a + 1, line.find(',', a + 1) - a - 1)));
  }
  ASSERT_EQ(loss.size(), 10u);
  EXPECT_LT(loss.back(), loss.front());
  EXPECT_EQ(count_files(fs::path(out("t")) / "checkpoints", ".json"), 10u);
}

TEST_F(Cli, EvalEdgelessGraphsAreExact) {
  fs::create_directories(out("data"));
  for (int i = 0; i < 3; ++i)
    save_graph(fs::path(out("data")) / ("g" + std::to_string(i) + ".graph"), Graph(5), NodeUtilities{0.1, 0.5, 0.2 + i, 1, 0.3});
  save_model(fs::path(out("m.json")), one_layer_model(0.2, 0.9));
  ASSERT_EQ(run("eval -m " + out("m.json") + " --data " + out("data") + " --out " + out("e")), 0) << stderr_text();
  const auto rep = records("e");
  EXPECT_EQ(rep.records.size(), 6u);
  for (const auto &r : rep.records) EXPECT_EQ(r.ratio, 1.0);
}

TEST_F(Cli, EvalIdentityModelMatchesGreedy) {
  save_model(fs::path(out("id.json")), one_layer_model(1.0, 0.0));
  ASSERT_EQ(run("eval -m " + out("id.json") + " --testset desk-test --seed 5 --out " + out("e")), 0) << stderr_text();
  const auto rep = records("e");
  EXPECT_EQ(rep.ratios("gcn"), rep.ratios("greedy"));
  EXPECT_EQ(rep.ratios("gcn").size(), 100u);
  const auto summary = nlohmann::json::parse(slurp(fs::path(out("e")) / "summary.json"));
  EXPECT_EQ(summary["instances_flagged"], 0);
  EXPECT_EQ(summary["buckets"].size(), 20u);
}

TEST_F(Cli, SimulateSingleLink) {
  save_network(fs::path(out("one.network")), make_network({{0, 0}, {0.5, 0}}, 2, 1, 4));
  save_model(fs::path(out("m.json")), one_layer_model(0.3, 0.7));
  ASSERT_EQ(run("simulate -m " + out("m.json") + " --network " + out("one.network") +
                " --instances 1 --slots 2 --out " + out("s")),
            0)
      << stderr_text();
  const auto rep = records("s");
  ASSERT_EQ(rep.records.size(), 3u);
  for (const auto &r : rep.records) EXPECT_EQ(r.ratio, 1.0);
  // A single slot from empty queues delivers nothing, so the run is flagged.
  ASSERT_EQ(run("simulate --network " + out("one.network") + " --instances 1 --slots 1 --out " + out("s1")), 0);
  EXPECT_TRUE(records("s1").records.empty());
}

TEST_F(Cli, SimulateIsDeterministicAndRerunReproduces) {
  save_model(fs::path(out("m.json")), one_layer_model(0.5, 0.8));
  const std::string args = "simulate -m " + out("m.json") + " --networks 2 --instances 2 --slots 20 --seed 9 ";
  ASSERT_EQ(run(args + "--out " + out("a") + " --trace-dir " + out("a/traces")), 0) << stderr_text();
  ASSERT_EQ(run(args + "--jobs 3 --out " + out("b") + " --trace-dir " + out("b/traces")), 0);
  ASSERT_EQ(run("rerun " + out("a") + "/manifest.json --out " + out("c")), 0) << stderr_text();
  for (const char *f : {"records.csv", "summary.json", "histogram.csv"}) {
    EXPECT_EQ(slurp(fs::path(out("a")) / f), slurp(fs::path(out("b")) / f)) << f;
    EXPECT_EQ(slurp(fs::path(out("a")) / f), slurp(fs::path(out("c")) / f)) << f;
  }
  EXPECT_EQ(count_files(fs::path(out("a")) / "traces", ".csv"), 2u * 2u * 3u);
}

TEST_F(Cli, RerunReproducesTraining) {
  ASSERT_EQ(run("train --dataset desk-test --epochs 2 --updates-per-epoch 2 --seed 3 --out " + out("a")), 0)
      << stderr_text();
  ASSERT_EQ(run("rerun " + out("a") + "/manifest.json --out " + out("b")), 0) << stderr_text();
  EXPECT_EQ(slurp(fs::path(out("a")) / "model.json"), slurp(fs::path(out("b")) / "model.json"));
  EXPECT_EQ(slurp(fs::path(out("a")) / "history.csv"), slurp(fs::path(out("b")) / "history.csv"));
}

TEST_F(Cli, ReportRebuildsAggregates) {
  save_model(fs::path(out("id.json")), one_layer_model(1.0, 0.0));
  ASSERT_EQ(run("eval -m " + out("id.json") + " --out " + out("e")), 0);
  ASSERT_EQ(run("report " + out("e") + "/records.csv --out " + out("r")), 0) << stderr_text();
  EXPECT_EQ(slurp(fs::path(out("e")) / "histogram.csv"), slurp(fs::path(out("r")) / "histogram.csv"));
}

TEST_F(Cli, OutputDirectoryFromEnvironment) {
  ASSERT_EQ(run("generate --spec ba:n=20,m=2,count=2", "GCNMWIS_OUT=\"" + out("env") + "\""), 0) << stderr_text();
  EXPECT_EQ(count_files(out("env"), ".graph"), 2u);
  EXPECT_TRUE(fs::exists(fs::path(out("env")) / "manifest.json"));
}
