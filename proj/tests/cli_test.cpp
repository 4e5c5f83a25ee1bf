//
// Project ScaffDiff - Copyright 2026 ScaffDiff Developers.
// SPDX-License-Identifier: Apache-2.0
//

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "fixtures.hpp"
#include "scaffdiff/dataset_io.hpp"

namespace scaffdiff {
namespace {

const char *kCli = SCAFFDIFF_CLI_PATH;

std::string dir() { return ::testing::TempDir(); }

int run(const std::string &args) {
  const std::string cmd = std::string(kCli) + " " + args + " 2>" + dir() +
                          "cli_stderr.txt >" + dir() + "cli_stdout.txt";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const std::string &path) {
  std::ifstream in(path);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

std::string cli_stdout() { return slurp(dir() + "cli_stdout.txt"); }
std::string cli_stderr() { return slurp(dir() + "cli_stderr.txt"); }

void write_file(const std::string &path, const std::string &content) {
  std::ofstream out(path);
  out << content;
}

std::string small_config() {
  const std::string path = dir() + "config.json";
  write_file(path, R"({"T": 8, "hidden_dim": 8, "message_dim": 8,
    "n_layers": 1, "feature_dim": 6, "time_dim": 4,
    "beta_interpretation": "cumulative", "lr": 0.003})");
  return path;
}

TEST(Cli, UnknownSubcommandExitsTwo) {
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("schedule dump"), 2);  // missing required --T
}

TEST(Cli, ScheduleDumpEmitsRequestedRecords) {
  EXPECT_EQ(run("schedule dump --T 10 --out -"), 0);
  std::istringstream is(cli_stdout());
  std::string line;
  int64_t count = 0;
  while (std::getline(is, line)) {
    auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j.at("t").get<int64_t>(), ++count);
  }
  EXPECT_EQ(count, 10);
}

TEST(Cli, ConserveWritesSixDecimalScores) {
  const std::string a3m = dir() + "tiny.a3m";
  write_file(a3m, testing::make_a3m(5, 2));
  EXPECT_EQ(run("conserve --a3m " + a3m + " --out -"), 0);
  std::istringstream is(cli_stdout());
  std::string line;
  int64_t rows = 0;
  while (std::getline(is, line)) {
    int64_t index;
    std::string score;
    std::istringstream ls(line);
    ls >> index >> score;
    EXPECT_EQ(index, rows++);
    EXPECT_EQ(score.size() - score.find('.') - 1, 6u);  // 6 decimal places
  }
  EXPECT_EQ(rows, 5);
  // First two columns are fully conserved in the fixture.
  EXPECT_NE(cli_stdout().find("0 1.000000"), std::string::npos);
}

TEST(Cli, MalformedConfigNamesTheKeyAndExitsTwo) {
  const std::string path = dir() + "bad_config.json";
  write_file(path, R"({"T": 8, "no_such_key": 1})");
  EXPECT_EQ(run("schedule dump --T 4 --out -"), 0);  // sanity
  EXPECT_EQ(run("pretrain-iprior --data /nonexistent --out x --config " + path),
            2);
  EXPECT_NE(cli_stderr().find("no_such_key"), std::string::npos);
}

TEST(Cli, SelfcheckPasses) {
  EXPECT_EQ(run("selfcheck"), 0);
  EXPECT_EQ(cli_stdout().find("[FAIL]"), std::string::npos);
}

TEST(Cli, EndToEndPipeline) {
  const std::string data = dir() + "train.jsonl";
  save_dataset(data, testing::make_dataset(2));
  const std::string cfg = small_config();
  const std::string iprior = dir() + "iprior.ckpt";
  const std::string model = dir() + "model.ckpt";
  const std::string gen = dir() + "generated.jsonl";
  const std::string report = dir() + "report.json";
  const std::string poses = dir() + "poses";

  ASSERT_EQ(run("pretrain-iprior --data " + data + " --out " + iprior +
                " --steps 5 --seed 3 --config " + cfg),
            0);
  ASSERT_EQ(run("train --data " + data + " --iprior " + iprior + " --out " +
                model + " --steps 5 --seed 4 --config " + cfg),
            0);
  // One JSON log line per step.
  std::istringstream is(cli_stdout());
  std::string line;
  int64_t steps = 0;
  while (std::getline(is, line)) {
    auto j = nlohmann::json::parse(line);
    EXPECT_TRUE(j.contains("loss") && j.contains("t") &&
                j.contains("grad_norm"));
    ++steps;
  }
  EXPECT_EQ(steps, 5);

  ASSERT_EQ(run("sample --model " + model + " --iprior " + iprior +
                " --data " + data + " --n 2 --seed 5 --out " + gen),
            0);
  auto generated = load_dataset(gen);
  ASSERT_EQ(generated.size(), 4u);  // 2 pockets x 2 samples
  auto references = load_dataset(data);
  for (const auto &mol : generated) {
    ASSERT_TRUE(mol.rgroup.has_value());
    ASSERT_TRUE(mol.pocket_id.has_value());
    // Scaffold atoms bit-identical to the input scaffold.
    const auto &ref = references[static_cast<size_t>(*mol.pocket_id)];
    EXPECT_EQ(max_abs_diff(mol.scaffold.coords, ref.scaffold.coords), 0.0);
    EXPECT_EQ(max_abs_diff(mol.scaffold.types, ref.scaffold.types), 0.0);
  }

  ASSERT_EQ(run("eval --data " + data + " --generated " + gen + " --out " +
                report + " --config " + cfg),
            0);
  auto j = nlohmann::json::parse(slurp(report));
  EXPECT_TRUE(j.contains("validity") && j.contains("uniqueness") &&
              j.contains("mean_interactions") &&
              j.contains("mean_conserved_interactions"));
  EXPECT_EQ(j.at("pockets").size(), 2u);

  ASSERT_EQ(run("export-poses --generated " + gen + " --out-dir " + poses), 0);
  for (int i = 0; i < 4; ++i) {
    char name[64];
    std::snprintf(name, sizeof(name), "pose_%05d.xyz", i);
    std::ifstream xyz(poses + "/" + name);
    EXPECT_TRUE(xyz.good()) << name;
    int64_t atoms = 0;
    xyz >> atoms;
    EXPECT_GT(atoms, 0);
  }
}

TEST(Cli, SampleWithA3mDirUsesConservation) {
  const std::string data = dir() + "train2.jsonl";
  save_dataset(data, testing::make_dataset(1));
  const std::string a3m_dir = dir() + "a3m";
  std::system(("mkdir -p " + a3m_dir).c_str());
  write_file(a3m_dir + "/pocket_0.a3m", testing::make_a3m(8, 4));
  const std::string cfg = small_config();
  const std::string iprior = dir() + "iprior2.ckpt";
  const std::string model = dir() + "model2.ckpt";
  const std::string gen = dir() + "generated2.jsonl";

  ASSERT_EQ(run("pretrain-iprior --data " + data + " --out " + iprior +
                " --steps 3 --seed 3 --config " + cfg),
            0);
  ASSERT_EQ(run("train --data " + data + " --iprior " + iprior + " --out " +
                model + " --steps 3 --seed 4 --config " + cfg + " --a3m-dir " +
                a3m_dir),
            0);
  ASSERT_EQ(run("sample --model " + model + " --iprior " + iprior +
                " --data " + data + " --n 1 --seed 5 --out " + gen +
                " --a3m-dir " + a3m_dir),
            0);
  // A missing alignment is a usage error.
  EXPECT_EQ(run("sample --model " + model + " --iprior " + iprior +
                " --data " + data + " --n 1 --seed 5 --out " + gen +
                " --a3m-dir " + dir()),
            2);
}

TEST(Cli, SeedEnvFallback) {
  const std::string data = dir() + "train3.jsonl";
  save_dataset(data, testing::make_dataset(1));
  const std::string cfg = small_config();
  const std::string a = dir() + "ipA.ckpt";
  const std::string b = dir() + "ipB.ckpt";
  ASSERT_EQ(run("pretrain-iprior --data " + data + " --out " + a +
                " --steps 2 --config " + cfg + " --seed 123"),
            0);
  setenv("SCAFFDIFF_SEED", "123", 1);
  ASSERT_EQ(run("pretrain-iprior --data " + data + " --out " + b +
                " --steps 2 --config " + cfg),
            0);
  unsetenv("SCAFFDIFF_SEED");
  EXPECT_EQ(slurp(a), slurp(b));  // byte-identical checkpoints
}

TEST(Cli, TraceWritesTrajectories) {
  const std::string data = dir() + "train4.jsonl";
  save_dataset(data, testing::make_dataset(1));
  const std::string cfg = small_config();
  const std::string iprior = dir() + "ip4.ckpt";
  const std::string model = dir() + "m4.ckpt";
  const std::string gen = dir() + "gen4.jsonl";
  const std::string trace = dir() + "trace4";

  ASSERT_EQ(run("pretrain-iprior --data " + data + " --out " + iprior +
                " --steps 2 --seed 1 --config " + cfg),
            0);
  ASSERT_EQ(run("train --data " + data + " --iprior " + iprior + " --out " +
                model + " --steps 2 --seed 1 --config " + cfg),
            0);
  ASSERT_EQ(run("sample --model " + model + " --iprior " + iprior +
                " --data " + data + " --n 1 --seed 2 --out " + gen +
                " --trace " + trace),
            0);
  std::ifstream tr(trace + "/pocket0_sample0.jsonl");
  ASSERT_TRUE(tr.good());
  std::string line;
  int64_t steps = 0;
  int64_t last_t = 9;
  while (std::getline(tr, line)) {
    auto j = nlohmann::json::parse(line);
    const int64_t t = j.at("t").get<int64_t>();
    EXPECT_EQ(t, last_t - 1);  // monotone decreasing from T
    last_t = t;
    ++steps;
  }
  EXPECT_EQ(steps, 8);  // T = 8
}

}  // namespace
}  // namespace scaffdiff
