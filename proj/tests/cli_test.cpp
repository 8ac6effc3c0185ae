//
// Copyright 2026 The dpbeta Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// End-to-end tests of the dpbeta command-line tool.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "dpbeta/io.hpp"
#include "support/oracles.hpp"

namespace dpbeta {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("dpbeta_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  // Runs the tool with the given arguments; stdout and stderr go to files.
  int run(const std::string& args) const {
    const std::string cmd = std::string(DPBETA_CLI_PATH) + " " + args + " > " + path("stdout.txt") +
                            " 2> " + path("stderr.txt");
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string read(const std::string& name) const {
    std::ifstream in(path(name));
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  void write(const std::string& name, const std::string& content) const {
    std::ofstream(path(name)) << content;
  }

  std::string network_args() const {
    return "--edges " + path("edges.txt") + " --attrs " + path("attrs.csv") + " --covariates product";
  }

  void generate(int n = 40, double c = 0.1, int seed = 3) const {
    ASSERT_EQ(run("generate --n " + std::to_string(n) + " --c " + std::to_string(c) +
                  " --gamma 0.5 -0.5 --seed " + std::to_string(seed) + " --edges " +
                  path("edges.txt") + " --attrs " + path("attrs.csv")),
              0)
        << read("stderr.txt");
  }

  fs::path dir_;
};

TEST_F(CliTest, HelpAndUsageErrors) {
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run("fit --no-such-flag"), 1);
  EXPECT_EQ(run("release"), 1);  // --edges is required
  EXPECT_EQ(run(""), 1);
}

TEST_F(CliTest, GenerateAndStats) {
  generate();
  EXPECT_EQ(run("stats " + network_args() + " -o " + path("stats.json")), 0) << read("stderr.txt");
  const Json j = Json::parse(read("stats.json"));
  EXPECT_EQ(j["n"], 40);
  EXPECT_EQ(j["p"], 2);
  EXPECT_EQ(j["covariates"], Json::array({"x1", "x2"}));
  EXPECT_DOUBLE_EQ(j["z_star"].get<double>(), 1.0);
  EXPECT_TRUE(j.contains("degree_summary"));
  EXPECT_EQ(j["labels"].size(), 40u);
}

TEST_F(CliTest, GeneratedAttributesReproduceCovariates) {
  generate(25, 0.0, 8);
  Rng rng(8);
  const auto expected = make_sim_covariates(25, rng);
  DatasetSpec spec;
  spec.edge_file = path("edges.txt");
  spec.attr_file = path("attrs.csv");
  spec.covariate_rule = CovariateRule::kProduct;
  spec.num_nodes = 25;
  EXPECT_EQ(load_network(spec).network.covariates(), expected);
}

TEST_F(CliTest, ReleaseIsDeterministicInSeed) {
  generate();
  const std::string base = "release " + network_args() + " --epsilon 1.5 --k 1 ";
  ASSERT_EQ(run(base + "--seed 7 -o " + path("r1.json")), 0) << read("stderr.txt");
  ASSERT_EQ(run(base + "--seed 7 -o " + path("r2.json")), 0);
  ASSERT_EQ(run(base + "--seed 8 -o " + path("r3.json")), 0);
  EXPECT_EQ(read("r1.json"), read("r2.json"));
  EXPECT_NE(read("r1.json"), read("r3.json"));
  const auto r = released_from_json(Json::parse(read("r1.json")));
  EXPECT_EQ(r.seed, 7u);
  ASSERT_TRUE(r.budget.has_value());
  EXPECT_DOUBLE_EQ(r.budget->epsilon, 1.5);
  EXPECT_DOUBLE_EQ(r.lambda1, std::exp(-1.5 / 4));

  ASSERT_EQ(run("release " + network_args() + " --epsilon-rule logn_n16 --seed 1 -o " + path("r4.json")), 0);
  EXPECT_DOUBLE_EQ(released_from_json(Json::parse(read("r4.json"))).budget->epsilon,
                   std::log(40.0) / std::pow(40.0, 1.0 / 6.0));
  EXPECT_EQ(run("release " + network_args() + " --epsilon -1 --seed 1"), 1);
}

TEST_F(CliTest, NoPrivacyFitMatchesOracle) {
  generate(50, 0.1, 11);
  ASSERT_EQ(run("fit " + network_args() + " --no-privacy -o " + path("fit.json")), 0) << read("stderr.txt");
  const FitResult f = fit_from_json(Json::parse(read("fit.json")));
  ASSERT_TRUE(f.exists);

  DatasetSpec spec;
  spec.edge_file = path("edges.txt");
  spec.attr_file = path("attrs.csv");
  spec.covariate_rule = CovariateRule::kProduct;
  const auto oracle = testing::full_newton_mle(load_network(spec).network);
  ASSERT_TRUE(oracle.converged);
  EXPECT_LT((f.beta_hat - oracle.beta).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LT((f.gamma_hat - oracle.gamma).cwiseAbs().maxCoeff(), 1e-6);
}

TEST_F(CliTest, ReleaseFitInferPipeline) {
  generate(60, 0.05, 12);
  ASSERT_EQ(run("release " + network_args() + " --epsilon 3 --seed 2 -o " + path("rel.json")), 0);
  ASSERT_EQ(run("fit " + network_args() + " --released " + path("rel.json") + " --emit-matrices -o " +
                path("fit.json")),
            0)
      << read("stderr.txt");
  const Json fj = Json::parse(read("fit.json"));
  EXPECT_TRUE(fj.contains("V"));
  EXPECT_TRUE(fj.contains("H"));

  ASSERT_EQ(run("infer " + network_args() + " --fit " + path("fit.json") +
                " --pairs '1,2;3,60' --level 0.9 -o " + path("inf.json")),
            0)
      << read("stderr.txt");
  const auto report = inference_from_json(Json::parse(read("inf.json")));
  ASSERT_EQ(report.intervals.size(), 2u + 2u + 2u);
  EXPECT_EQ(report.intervals[1].label, "beta[3]-beta[60]");
  EXPECT_DOUBLE_EQ(report.intervals[0].level, 0.9);

  ASSERT_EQ(run("infer " + network_args() + " --fit " + path("fit.json") + " --format csv -o " +
                path("inf.csv")),
            0);
  const std::string csv = read("inf.csv");
  EXPECT_EQ(csv.rfind("parameter,estimate,lower,upper,level\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 5 + 4);

  EXPECT_EQ(run("infer " + network_args() + " --fit " + path("fit.json") + " --pairs '1,1'"), 1);
  EXPECT_EQ(run("infer " + network_args() + " --fit " + path("fit.json") + " --pairs '1,99'"), 1);
}

TEST_F(CliTest, DataErrorsAndNonExistence) {
  EXPECT_EQ(run("stats --edges " + path("missing.txt")), 2);
  write("bad.txt", "1 2\n2 three\n");
  EXPECT_EQ(run("stats --edges " + path("bad.txt")), 2);
  EXPECT_NE(read("stderr.txt").find(":2:"), std::string::npos);

  // Node 4 is isolated, so the released degree 0 has no estimate.
  write("iso.txt", "1 2\n2 3\n1 3\n3 5\n");
  EXPECT_EQ(run("fit --edges " + path("iso.txt") + " --no-privacy -o " + path("fit.json")), 3);
  const Json j = Json::parse(read("fit.json"));
  EXPECT_EQ(j["exists"], false);
  EXPECT_EQ(j["status"], "degree_out_of_range");
  EXPECT_EQ(run("infer --edges " + path("iso.txt") + " --fit " + path("fit.json")), 2);
  EXPECT_EQ(run("fit --edges " + path("iso.txt") + " --drop-isolated --no-privacy"), 3);
}

TEST_F(CliTest, SimulateIsDeterministicAcrossThreads) {
  const std::string base = "simulate --n 30 --c 0.1 --replications 16 --seed 4 ";
  ASSERT_EQ(run(base + "--threads 1 -o " + path("t1.csv") + " --qq-output " + path("q1.csv")), 0)
      << read("stderr.txt");
  ASSERT_EQ(run(base + "--threads 8 -o " + path("t8.csv") + " --qq-output " + path("q8.csv")), 0);
  ASSERT_EQ(run(base + "--threads 8 -o " + path("t8.json")), 0);
  ASSERT_EQ(run(base + "--threads 1 -o " + path("t1.json")), 0);
  EXPECT_EQ(read("t1.csv"), read("t8.csv"));
  EXPECT_EQ(read("q1.csv"), read("q8.csv"));
  EXPECT_EQ(read("t1.json"), read("t8.json"));
  const Json j = Json::parse(read("t1.json"));
  EXPECT_EQ(j["table"]["replications"], 16);
  EXPECT_EQ(j["design"]["seed"], 4);
}

TEST_F(CliTest, SimulateFromConfigWithOverrides) {
  write("design.toml",
        "n = 25\nc = 0.05\nepsilon_rule = logn_n14\nreplications = 5\nseed = 9\n"
        "pairs = [[1, 2]]\n[fit]\nbeta_tol = 1e-9\n");
  ASSERT_EQ(run("simulate --config " + path("design.toml") + " --replications 6 --format json"), 0)
      << read("stderr.txt");
  const Json j = Json::parse(read("stdout.txt"));
  EXPECT_EQ(j["design"]["n"], 25);
  EXPECT_EQ(j["design"]["replications"], 6);
  EXPECT_EQ(j["design"]["epsilon_rule"], "logn_n14");
  EXPECT_EQ(j["table"]["pairs"].size(), 1u);
  EXPECT_EQ(run("simulate --config " + path("design.toml") + " --n 2"), 1);
  EXPECT_EQ(run("simulate --config " + path("nope.toml")), 2);
}

}  // namespace
}  // namespace dpbeta
