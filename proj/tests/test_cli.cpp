// Copyright 2026 The fng Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"

namespace {

namespace fs = std::filesystem;
using fng::cli::run_main;

struct Cli : ::testing::Test {
  fs::path dir;
  std::ostringstream out, err;

  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("fng_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  fs::path write(const std::string& name, const std::string& text) {
    const fs::path p = dir / name;
    std::ofstream(p) << text;
    return p;
  }
  int run(std::vector<std::string> args) {
    out.str("");
    err.str("");
    args.insert(args.begin(), "fng");
    return run_main(args, out, err);
  }
  static std::vector<double> matrix_entries(const std::string& text) {
    std::string body = text.substr(text.find("[["));
    for (char& c : body) {
      if (c == '[' || c == ']' || c == ',') c = ' ';
    }
    std::istringstream in(body);
    std::vector<double> v;
    for (double x; in >> x;) v.push_back(x);
    return v;
  }
  static std::string first_line(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    return line;
  }
};

TEST_F(Cli, RunWritesTrace) {
  const auto cfg = write("run.json", R"({
    "family": "gaussian1d", "similarity": "kl", "theta0": [2, 3], "target": [0, 1],
    "optimizer": {"max_iters": 100}
  })");
  ASSERT_EQ(run({"run", cfg.string(), "--output-dir", (dir / "out").string()}), 0) << err.str();
  EXPECT_NE(out.str().find("status: converged"), std::string::npos) << out.str();
  EXPECT_NE(out.str().find("metric: fdiv:kl"), std::string::npos);
  EXPECT_EQ(first_line(dir / "out" / "trace_fdiv_kl.csv"), "iter,cost,grad_norm,step_norm,damping,time_s");
}

TEST_F(Cli, OutputDirFromConfig) {
  const auto cfg = write("run.json", R"({
    "family": "categorical_softmax", "family_options": {"categories": 3}, "similarity": "fisher_rao2",
    "theta0": [1, 0, -1], "target": [0, 0, 0], "output_dir": ")" +
                                         (dir / "cfgout").string() + R"("})");
  ASSERT_EQ(run({"run", cfg.string()}), 0) << err.str();
  EXPECT_TRUE(fs::exists(dir / "cfgout" / "trace_pullback.csv"));
}

TEST_F(Cli, MisspelledMetricListsValidIds) {
  const auto cfg = write("bad.json", R"({
    "family": "gaussian1d", "similarity": "kl", "metric": "fishr", "theta0": [2, 3], "target": [0, 1]
  })");
  EXPECT_EQ(run({"run", cfg.string(), "--output-dir", dir.string()}), 1);
  EXPECT_NE(err.str().find("fishr"), std::string::npos) << err.str();
  EXPECT_NE(err.str().find("fisher"), std::string::npos);
  EXPECT_NE(err.str().find("w2_1d"), std::string::npos);
}

TEST_F(Cli, ConfigErrorsExitOne) {
  EXPECT_EQ(run({"run", (dir / "missing.json").string()}), 1);
  EXPECT_EQ(run({"run", write("a.json", "{not json").string()}), 1);
  EXPECT_EQ(run({"run", write("b.json", R"({"family":"gaussian1d","similarity":"kl","theta0":[0,1],"target":[0,1],"extra":1})").string()}), 1);
  EXPECT_NE(err.str().find("extra"), std::string::npos);
  EXPECT_EQ(run({"run", write("c.json", R"({"family":"gaussian1d","similarity":"kl","theta0":[0],"target":[0,1]})").string()}), 1);
  EXPECT_EQ(run({"run", write("d.json", R"({"family":"gaussian1d","similarity":"kl","theta0":[0,1],"target":[0,1],"optimizer":{"learning_rate":-1}})").string()}), 1);
  EXPECT_EQ(run({"nonsense"}), 1);
}

TEST_F(Cli, NumericFailureExitsTwo) {
  // lambda divides the step, so a tiny learning rate without line search blows up
  const auto cfg = write("blowup.json", R"({
    "family": "gaussian1d", "similarity": "kl", "metric": "euclidean", "theta0": [2, 3], "target": [0, 1],
    "optimizer": {"learning_rate": 1e-4, "line_search": false, "max_iters": 50}
  })");
  EXPECT_EQ(run({"run", cfg.string(), "--output-dir", dir.string()}), 2) << out.str() << err.str();
  EXPECT_NE(out.str().find("numeric_failure"), std::string::npos);
}

TEST_F(Cli, GpTargetRunsBenchmark) {
  const auto cfg = write("gp.json", R"({"target": {"gp": {"m": 10}}, "optimizer": {"max_iters": 30}})");
  ASSERT_EQ(run({"run", cfg.string(), "--output-dir", dir.string()}), 0) << err.str();
  EXPECT_EQ(first_line(dir / "summary.csv"), "metric,iters_to_threshold,final_cost,status");
  EXPECT_TRUE(fs::exists(dir / "trace_fisher.csv"));
  EXPECT_TRUE(fs::exists(dir / "trace_euclidean.csv"));
  EXPECT_TRUE(fs::exists(dir / "trace_fd_w2_gaussian.csv"));
}

TEST_F(Cli, BenchGp) {
  const auto cfg = write("bench.json", R"({"metrics": ["fisher", "euclidean"], "seed": 3})");
  ASSERT_EQ(run({"bench-gp", cfg.string(), "--output-dir", dir.string()}), 0) << err.str();
  EXPECT_NE(out.str().find("fisher"), std::string::npos);
  std::ifstream in(dir / "summary.csv");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  EXPECT_EQ(rows, 3);
  EXPECT_EQ(run({"bench-gp", write("bad.json", R"({"m": 1})").string()}), 1);
}

TEST_F(Cli, HessianExamples) {
  ASSERT_EQ(run({"hessian", "gaussian1d", "kl", "0,1"}), 0) << err.str();
  EXPECT_NE(out.str().find("[[1,0],\n [0,2]]"), std::string::npos) << out.str();
  EXPECT_NE(out.str().find("analytic"), std::string::npos);

  ASSERT_EQ(run({"hessian", "gaussian1d", "wasserstein:2", "0,1"}), 0) << err.str();
  const std::vector<double> w2 = matrix_entries(out.str());
  ASSERT_EQ(w2.size(), 4u) << out.str();
  EXPECT_NEAR(w2[0], 1.0, 1e-10);
  EXPECT_NEAR(w2[1], 0.0, 1e-10);
  EXPECT_NEAR(w2[2], 0.0, 1e-10);
  EXPECT_NEAR(w2[3], 1.0, 1e-10);

  ASSERT_EQ(run({"hessian", "gaussian1d", "kl", "-1,2", "--check"}), 0) << err.str();
  EXPECT_NE(out.str().find("fd_max_abs_deviation"), std::string::npos);
}

TEST_F(Cli, HessianDirectionDependent) {
  EXPECT_EQ(run({"hessian", "gaussian1d", "wasserstein:3", "0,1"}), 1);
  EXPECT_NE(err.str().find("--direction"), std::string::npos);
  EXPECT_EQ(run({"hessian", "gaussian1d", "wasserstein:3", "0,1", "--direction", "1,0.5"}), 0) << err.str();
  EXPECT_NE(out.str().find("wp_1d:3"), std::string::npos);
}

TEST_F(Cli, HessianRejectsBadInput) {
  EXPECT_EQ(run({"hessian", "gaussian1d", "kl", "0"}), 1);
  EXPECT_EQ(run({"hessian", "gaussian1d", "kl", "0,x"}), 1);
  EXPECT_EQ(run({"hessian", "gausian", "kl", "0,1"}), 1);
  EXPECT_EQ(run({"hessian", "gaussian1d", "kl", "0,1", "--metric", "pullback"}), 1);
}

TEST_F(Cli, ValidateAndFaultInjection) {
  ASSERT_EQ(run({"validate"}), 0) << out.str() << err.str();
  EXPECT_EQ(out.str().find("FAIL"), std::string::npos);
  EXPECT_NE(out.str().find("checks passed"), std::string::npos);
  EXPECT_EQ(run({"validate", "--inject-fisher-scale", "1.1"}), 1);
  EXPECT_NE(out.str().find("FAIL"), std::string::npos);
  // the hook is undone afterwards
  EXPECT_EQ(run({"validate"}), 0);
}

TEST_F(Cli, ParseVector) {
  EXPECT_EQ(fng::cli::parse_vector("0.5, 1,-2"), (fng::Vector(3) << 0.5, 1, -2).finished());
  EXPECT_THROW(fng::cli::parse_vector(""), fng::ConfigError);
  EXPECT_THROW(fng::cli::parse_vector("1,,2"), fng::ConfigError);
}

}  // namespace
