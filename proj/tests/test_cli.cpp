#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <sys/wait.h>

#include "entwit/dataset_io.hpp"
#include "entwit/hash.hpp"
#include "entwit/svm_io.hpp"
#include "entwit/witness.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string output;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(ENTWIT_CLI_PATH) + " " + args + " 2>&1";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.output.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// CSV body without '#' comment lines, split into rows.
std::vector<std::vector<std::string>> csv_rows(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(read_file(p));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("entwit_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string at(const std::string& name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

}  // namespace

TEST_F(Cli, GenTwoQubitSplitsAndReplay) {
  ASSERT_EQ(run("--seed 5 --out " + at("a") + " gen --kind two-qubit --count 100").code, 0);
  ASSERT_EQ(run("--seed 5 --threads 3 --out " + at("b") + " gen --kind two-qubit --count 100").code, 0);
  const auto ds = entwit::datagen::load_dataset(at("a/dataset.csv"));
  EXPECT_EQ(ds.rows.size(), 200u);
  EXPECT_EQ(ds.count(entwit::datagen::Split::Validation), 2u);
  EXPECT_EQ(ds.count(entwit::datagen::Split::Test), 2u);
  EXPECT_EQ(read_file(at("a/dataset.csv")), read_file(at("b/dataset.csv")));
  EXPECT_TRUE(fs::exists(at("a/run_config.toml")));
  const auto summary = nlohmann::json::parse(read_file(at("a/gen.json")));
  EXPECT_EQ(summary.at("provenance").at("seed").get<std::uint64_t>(), 5u);
  EXPECT_EQ(summary.at("provenance").at("config_hash"), ds.config_hash);

  // Replaying the snapshot reproduces the file bit for bit.
  ASSERT_EQ(run("--config " + at("a/run_config.toml") + " --out " + at("c") + " gen").code, 0);
  EXPECT_EQ(entwit::file_hash(at("a/dataset.csv")), entwit::file_hash(at("c/dataset.csv")));
}

TEST_F(Cli, GenThreeQubitHistogram) {
  ASSERT_EQ(run("--out " + at("g") + " gen --kind gme-vs-all --count 400").code, 0);
  const auto summary = nlohmann::json::parse(read_file(at("g/gen.json")));
  EXPECT_EQ(summary.at("labels").at("+1").get<int>(), 200);
  EXPECT_EQ(summary.at("labels").at("-1").get<int>(), 200);
}

TEST_F(Cli, SweepEvalWitnessSimulate) {
  ASSERT_EQ(run("--out " + at("d") + " gen --kind two-qubit --count 300 --splits 0.8 0.1 0.1 --states").code, 0);
  const auto data = at("d/dataset.csv");
  const auto sweep = run("--out " + at("s") + " sweep --data " + data + " --degrees 1 2 --lambda-plus 1 --grid 0.5 1 2");
  ASSERT_EQ(sweep.code, 0) << sweep.output;
  const auto rows = csv_rows(at("s/sweep.csv"));
  ASSERT_EQ(rows.size(), 1u + 2u * 3u);  // header + one row per (n, lambda)
  EXPECT_EQ(rows[0][0], "degree");
  EXPECT_EQ(csv_rows(at("s/selection.csv")).size(), 1u + 2u * 3u);
  const auto model = entwit::svm::load_model(at("s/model_n2.json"));
  EXPECT_EQ(model.training.dataset_hash, entwit::hex_digest(entwit::file_hash(data)));

  ASSERT_EQ(run("--out " + at("e") + " eval --data " + data + " --model " + at("s/model_n1.json") + " " +
                at("s/model_n2.json") + " --split test validation")
                .code,
            0);
  EXPECT_EQ(csv_rows(at("e/eval_metrics.csv")).size(), 5u);

  ASSERT_EQ(run("--out " + at("w1") + " witness --model " + at("s/model_n1.json")).code, 0);
  const auto meta = nlohmann::json::parse(read_file(at("w1/witness.bin.json")));
  EXPECT_EQ(meta.at("dim").get<int>(), 4);  // 2^N for n = 1
  EXPECT_TRUE(meta.contains("provenance"));

  ASSERT_EQ(run("--out " + at("w2") + " witness --model " + at("s/model_n2.json")).code, 0);
  const auto sim = run("--out " + at("q") + " simulate --witness " + at("w2/witness.bin") + " --data " + data +
                       " --states " + at("d/dataset.states.bin") + " --rows 0 1 --random 1 --t 0.01 0.001");
  ASSERT_EQ(sim.code, 0) << sim.output;
  const auto srows = csv_rows(at("q/simulate.csv"));
  ASSERT_EQ(srows.size(), 1u + 3u * 2u);
  // Column 6 is |estimate - exact|; the estimate tends to exact / 2, so the
  // error settles at |exact| / 2 rather than vanishing.
  for (std::size_t r = 1; r < srows.size(); r += 2) {
    const double exact = std::stod(srows[r][5]);
    EXPECT_NEAR(std::stod(srows[r + 1][4]), exact / 2.0, 1e-3 * std::max(1.0, std::abs(exact)));
  }
}

TEST_F(Cli, SimulateZeroWitness) {
  entwit::witness::WitnessOperator w;
  w.n_qubits = 1;
  w.copies = 1;
  w.matrix = entwit::CMatrix::Zero(2, 2);
  entwit::witness::save_witness(w, at("zero.bin"), "none");
  ASSERT_EQ(run("--out " + at("z") + " simulate --witness " + at("zero.bin") + " --random 3 --t 0.1 0.01").code, 0);
  const auto rows = csv_rows(at("z/simulate.csv"));
  ASSERT_EQ(rows.size(), 7u);
  for (std::size_t r = 1; r < rows.size(); ++r) EXPECT_EQ(std::stod(rows[r][4]), 0.0);
}

TEST_F(Cli, LinearlySeparableToyReachesFullAccuracy) {
  // One-qubit states split by the sign of <Z>, well away from the boundary.
  entwit::datagen::LabeledDataset ds;
  ds.n_qubits = 1;
  for (int i = 0; i < 60; ++i) {
    const double z = (i % 2 ? 1 : -1) * (0.2 + 0.01 * (i % 30));
    entwit::datagen::DatasetRow r;
    r.label = i % 2 ? 1 : -1;
    r.family = "toy";
    r.split = i < 40 ? entwit::datagen::Split::Train : (i < 50 ? entwit::datagen::Split::Validation : entwit::datagen::Split::Test);
    r.x = Eigen::Vector3d((1.0 + z) / 2.0, 0.1 * (i % 3), 0.0);
    ds.rows.push_back(r);
  }
  entwit::datagen::save_dataset(ds, at("toy.csv"));
  ASSERT_EQ(run("--out " + at("t") + " train --data " + at("toy.csv") + " --degrees 1 --lambda-plus 10 --lambda-minus 10").code, 0);
  const auto rows = csv_rows(at("t/train_metrics.csv"));
  ASSERT_EQ(rows.size(), 4u);
  for (std::size_t r = 1; r < rows.size(); ++r) EXPECT_EQ(std::stod(rows[r][4]), 1.0) << rows[r][2];
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run("--out " + at("x") + " gen --kind four-qubit").code, 2);
  EXPECT_EQ(run("--out " + at("x") + " train --data " + at("missing.csv")).code, 2);
  EXPECT_EQ(run("").code, 2);
  {
    std::ofstream bad(at("bad.csv"));
    bad << "not a dataset\n";
  }
  EXPECT_EQ(run("--out " + at("x") + " train --data " + at("bad.csv")).code, 2);

  ASSERT_EQ(run("--out " + at("d") + " gen --count 200 --splits 0.8 0.1 0.1").code, 0);
  // Tight tolerance with a one-step cap cannot converge.
  const auto capped = "--out " + at("y") + " train --data " + at("d/dataset.csv") + " --degrees 2 --tol 1e-12";
  EXPECT_EQ(run(capped + " --max-iterations 1").code, 0);
  EXPECT_EQ(run("--strict " + capped + " --max-iterations 1").code, 3);

  ASSERT_EQ(run("--out " + at("w") + " train --data " + at("d/dataset.csv") + " --degrees 7").code, 0);
  const auto big = run("--out " + at("w") + " witness --model " + at("w/model_n7.json"));
  EXPECT_EQ(big.code, 2);
  EXPECT_NE(big.output.find("kernel form"), std::string::npos);
}

TEST_F(Cli, Selftest) {
  const auto r = run("selftest");
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_EQ(r.output.find("FAIL"), std::string::npos);
}
