// Copyright 2026 The TAST Engine Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

Result run(const std::string& args) {
  const std::string cmd = std::string(TAST_CLI_PATH) + " " + args + " 2>&1";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), pipe)) r.out += buf.data();
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// The number following `key` on the output.
double value_after(const std::string& text, const std::string& key) {
  const auto pos = text.find(key);
  if (pos == std::string::npos) return -1.0;
  return std::stod(text.substr(pos + key.size()));
}

std::string strip_wall(const std::string& jsonl) {
  std::string out;
  std::istringstream in(jsonl);
  std::string line;
  while (std::getline(in, line)) {
    const auto pos = line.find(",\"wall_ms\"");
    out += (pos == std::string::npos ? line : line.substr(0, pos)) + "\n";
  }
  return out;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("tast_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string at(const std::string& name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

}  // namespace

TEST_F(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("run --method tast").code, 1);
  EXPECT_EQ(run("run --method warp --features x --out y").code, 1);
  EXPECT_EQ(run("gen --shift sideways --out-dir " + at("g")).code, 1);
}

TEST_F(Cli, DataErrorsExitTwo) {
  { std::ofstream out(at("empty.jsonl")); }
  EXPECT_EQ(run("report " + at("empty.jsonl")).code, 2);
  std::ofstream(at("bad.tafs")) << "XXXXnot a feature file at all";
  EXPECT_EQ(run("run --method none --features " + at("bad.tafs") + " --out " + at("r.jsonl")).code, 2);
}

TEST_F(Cli, GenTrainRunReport) {
  const std::string gen = "gen --classes 4 --dim 12 --train-per-class 60 --val-per-class 40 --test-count 400 "
                          "--shift identity --seed 11 --out-dir " + at("");
  ASSERT_EQ(run(gen).code, 0);
  for (const char* f : {"train.tafs", "val.tafs", "test.tafs"}) EXPECT_TRUE(fs::exists(at(f))) << f;

  const Result tr = run("train-source --train " + at("train.tafs") + " --val " + at("val.tafs") + " --out " +
                        at("model.json") + " --embed " + at("test.tafs"));
  ASSERT_EQ(tr.code, 0) << tr.out;
  const double val_acc = value_after(tr.out, "validation_accuracy ");
  EXPECT_GT(val_acc, 0.5);

  // No shift: the unadapted head scores like it does on validation.
  const Result none = run("run --method none --features " + at("test.tafs") + " --out " + at("none.jsonl"));
  ASSERT_EQ(none.code, 0) << none.out;
  EXPECT_NEAR(value_after(none.out, "final_accuracy "), val_acc, 0.08);

  const Result tast = run("run --method tast --features " + at("test.tafs") + " --model " + at("model.json") +
                          " --ne 4 --config-json '{\"N_s\": 2}' --out " + at("none.jsonl") + " --append");
  ASSERT_EQ(tast.code, 0) << tast.out;

  const Result rep = run("report " + at("none.jsonl") + " --format csv --csv " + at("summary.csv"));
  ASSERT_EQ(rep.code, 0) << rep.out;
  const std::string csv = slurp(at("summary.csv"));
  EXPECT_EQ(csv.rfind("method,N_s,T,M,N_e,tau,lr,batch_size,seed,final_accuracy\n", 0), 0u);
  EXPECT_NE(csv.find("\nnone,1,"), std::string::npos);
  EXPECT_NE(csv.find("\ntast,2,1,100,4,"), std::string::npos);
}

TEST_F(Cli, RunsAreDeterministicApartFromWallTime) {
  ASSERT_EQ(run("gen --classes 3 --dim 8 --test-count 300 --seed 4 --out-dir " + at("")).code, 0);
  ASSERT_EQ(run("train-source --train " + at("train.tafs") + " --out " + at("m.json")).code, 0);
  for (const char* name : {"a.jsonl", "b.jsonl"})
    ASSERT_EQ(run("run --method tast --ne 3 --steps 2 --batch-size 16 --features " + at("test.tafs") +
                  " --model " + at("m.json") + " --out " + at(name))
                  .code,
              0);
  const std::string a = slurp(at("a.jsonl")), b = slurp(at("b.jsonl"));
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(strip_wall(a), strip_wall(b));
}

TEST_F(Cli, GridWritesBestConfigResults) {
  ASSERT_EQ(run("gen --classes 3 --dim 8 --test-count 150 --val-per-class 20 --seed 5 --out-dir " + at("")).code, 0);
  ASSERT_EQ(run("train-source --train " + at("train.tafs") + " --out " + at("m.json")).code, 0);
  const Result g = run("grid --method tast_n --model " + at("m.json") + " --val " + at("val.tafs") + " --test " +
                       at("test.tafs") + " --grid-ns 1,4 --grid-steps 1 --grid-m 5,-1 --out " + at("g.jsonl"));
  ASSERT_EQ(g.code, 0) << g.out;
  EXPECT_NE(slurp(at("g.jsonl")).find("\"method\":\"tast_n\""), std::string::npos);
}

TEST_F(Cli, CsvImportThenRunWithEmbeddedHead) {
  {
    std::ofstream out(at("rows.csv"));
    out << "0,1,0\n1,0,1\n0,0.9,0.1\n1,0.2,0.8\n";
  }
  ASSERT_EQ(run("gen --from-csv " + at("rows.csv") + " --out " + at("rows.tafs")).code, 0);
  ASSERT_EQ(run("train-source --train " + at("rows.tafs") + " --out " + at("m.json") + " --embed " + at("rows.tafs"))
                .code,
            0);
  const Result r = run("run --method none --features " + at("rows.tafs") + " --out " + at("r.jsonl"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_DOUBLE_EQ(value_after(r.out, "final_accuracy "), 1.0);
  // Without --model or an embedded head there is nothing to run.
  ASSERT_EQ(run("gen --from-csv " + at("rows.csv") + " --out " + at("bare.tafs")).code, 0);
  EXPECT_EQ(run("run --method none --features " + at("bare.tafs") + " --out " + at("r.jsonl")).code, 2);
}
