// Copyright 2026 The MTNet Forecasting Authors
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

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mtnet/checkpoint.hpp"
#include "mtnet/cli.hpp"
#include "mtnet/data.hpp"
#include "mtnet/io.hpp"
#include "mtnet/model.hpp"
#include "test_util.hpp"

namespace mtnet {
namespace {

namespace fs = std::filesystem;

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

CliResult run(std::vector<std::string> args) {
  args.insert(args.begin(), "mtnet");
  std::ostringstream out, err;
  CliResult r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t line_count(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("mtnet_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    data_ = (dir_ / "series.csv").string();
    SynthOptions opts;
    opts.length = 240;
    opts.variables = 2;
    opts.period = 12;
    opts.noise = 0.02;
    opts.seed = 5;
    atomic_write(data_, series_to_csv(synthesize(opts)));
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::vector<std::string> small(const std::string& command, const std::string& out_name) {
    return {command,          "--dataset",     data_,  "--memory-blocks", "2",  "--window", "6",
            "--hidden",       "4",             "--filters", "4",          "--kernel-width", "2",
            "--ar-window",    "3",             "--horizon", "1",             "--max-epochs", "2",       "--batch-size", "16",
            "--output-dir",   (dir_ / out_name).string()};
  }

  fs::path dir_;
  std::string data_;
};

TEST(RunConfigTest, SetAndFileAndOverride) {
  RunConfig rc;
  rc.set("hidden", " 16 ");
  rc.set("targets", "0,2");
  rc.set("delimiter", "tab");
  EXPECT_EQ(rc.model.hidden, 16u);
  EXPECT_EQ(rc.targets, (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(rc.data.load.delimiter, '\t');
  EXPECT_THROW(rc.set("bogus", "1"), ConfigError);
  EXPECT_THROW(rc.set("hidden", "abc"), ConfigError);

  const fs::path p = fs::temp_directory_path() / "mtnet_runconfig.txt";
  atomic_write(p.string(), "# comment\nwindow = 9  # trailing\n\nlearning_rate=0.01\n");
  RunConfig from_file;
  from_file.load_file(p.string());
  EXPECT_EQ(from_file.model.window, 9u);
  EXPECT_EQ(from_file.train.learning_rate, 0.01);

  RunConfig round;
  atomic_write(p.string(), from_file.to_text());
  round.load_file(p.string());
  EXPECT_EQ(round.to_text(), from_file.to_text());
  atomic_write(p.string(), "window 9\n");
  EXPECT_THROW(round.load_file(p.string()), ConfigError);
  fs::remove(p);
}

TEST(RunConfigTest, OutputDirFromEnvironment) {
  ::setenv("MTNET_OUTPUT_DIR", "/tmp/somewhere", 1);
  EXPECT_EQ(RunConfig().output_dir, "/tmp/somewhere");
  ::unsetenv("MTNET_OUTPUT_DIR");
  EXPECT_EQ(RunConfig().output_dir, "mtnet_output");
}

TEST(RunConfigTest, KeysCoverTextForm) {
  const std::string text = RunConfig().to_text();
  for (const std::string& k : run_config_keys()) {
    EXPECT_NE(text.find(k + " = "), std::string::npos) << k;
  }
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run({}).code, kExitUsage);
  EXPECT_EQ(run({"frobnicate"}).code, kExitUsage);
  const CliResult missing = run({"train"});
  EXPECT_EQ(missing.code, kExitUsage);
  EXPECT_NE(missing.err.find("dataset"), std::string::npos);
  const CliResult gp = run({"baseline", "--method", "gp", "--dataset", data_});
  EXPECT_EQ(gp.code, kExitUsage);
  EXPECT_NE(gp.err.find("ar, ridge"), std::string::npos);
  EXPECT_EQ(run({"train", "--dataset", data_, "--dropout", "1.5"}).code, kExitUsage);
  EXPECT_EQ(run({"train", "--dataset", (dir_ / "absent.csv").string()}).code, kExitFailure);
}

TEST_F(CliTest, ConfigFileIsOverriddenByFlags) {
  const fs::path cfg = dir_ / "run.txt";
  atomic_write(cfg.string(), "memory_blocks = 2\nwindow = 6\nhidden = 4\nfilters = 4\n"
                             "kernel_width = 2\nar_window = 3\nmax_epochs = 5\n");
  auto args = std::vector<std::string>{"train", "--config", cfg.string(), "--dataset", data_,
                                       "--max-epochs", "1", "--output-dir",
                                       (dir_ / "o").string()};
  ASSERT_EQ(run(args).code, kExitOk);
  const std::string chosen = slurp(dir_ / "o" / "run_config.txt");
  EXPECT_NE(chosen.find("max_epochs = 1\n"), std::string::npos);
  EXPECT_NE(chosen.find("window = 6\n"), std::string::npos);
  EXPECT_EQ(line_count(slurp(dir_ / "o" / "history.csv")), 2u);
}

TEST_F(CliTest, TrainWritesLoadableOutputsAtomically) {
  const CliResult r = run(small("train", "a"));
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const fs::path a = dir_ / "a";
  for (const char* f : {"checkpoint.txt", "history.csv", "run_config.txt", "metrics.csv",
                        "metrics.json", "attention.csv"}) {
    EXPECT_TRUE(fs::exists(a / f)) << f;
  }
  for (const auto& e : fs::directory_iterator(a)) {
    EXPECT_EQ(e.path().string().find(".tmp"), std::string::npos) << e.path();
  }
  const Checkpoint ck = load_checkpoint((a / "checkpoint.txt").string());
  EXPECT_EQ(ck.config.variables, 2u);
  EXPECT_EQ(ck.config.targets, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(ck.history.epochs, 2u);
}

TEST_F(CliTest, SameSeedGivesIdenticalCheckpoint) {
  ASSERT_EQ(run(small("train", "a")).code, kExitOk);
  ASSERT_EQ(run(small("train", "b")).code, kExitOk);
  const std::string a = slurp(dir_ / "a" / "checkpoint.txt");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(dir_ / "b" / "checkpoint.txt"));
  auto other = small("train", "c");
  other.insert(other.end(), {"--seed", "7"});
  ASSERT_EQ(run(other).code, kExitOk);
  EXPECT_NE(a, slurp(dir_ / "c" / "checkpoint.txt"));
}

TEST_F(CliTest, EvaluateReproducesTrainMetrics) {
  ASSERT_EQ(run(small("train", "a")).code, kExitOk);
  const std::string ck = (dir_ / "a" / "checkpoint.txt").string();
  const std::string out = (dir_ / "e").string();
  const CliResult r = run({"evaluate", "--dataset", data_, "--checkpoint", ck, "--traces",
                           "--output-dir", out});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(slurp(dir_ / "e" / "eval_metrics.csv"), slurp(dir_ / "a" / "metrics.csv"));
  EXPECT_EQ(slurp(dir_ / "e" / "eval_attention.csv"), slurp(dir_ / "a" / "attention.csv"));

  EXPECT_EQ(run({"evaluate", "--dataset", data_, "--checkpoint", ck, "--horizon", "3",
                 "--output-dir", out})
                .code,
            kExitUsage);
  EXPECT_EQ(run({"evaluate", "--dataset", data_, "--output-dir", out}).code, kExitUsage);

  SynthOptions wide;
  wide.length = 240;
  wide.variables = 3;
  const std::string other = (dir_ / "wide.csv").string();
  atomic_write(other, series_to_csv(synthesize(wide)));
  const CliResult mismatch =
      run({"evaluate", "--dataset", other, "--checkpoint", ck, "--output-dir", out});
  EXPECT_EQ(mismatch.code, kExitFailure);
  EXPECT_NE(mismatch.err.find("variables"), std::string::npos);
}

TEST_F(CliTest, PredictWritesForecast) {
  ASSERT_EQ(run(small("train", "a")).code, kExitOk);
  const CliResult r = run({"predict", "--dataset", data_, "--checkpoint",
                           (dir_ / "a" / "checkpoint.txt").string(), "--output-dir",
                           (dir_ / "p").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const std::string f = slurp(dir_ / "p" / "forecast.csv");
  EXPECT_EQ(line_count(f), 2u);
  EXPECT_EQ(f.rfind("target_time,", 0), 0u);
  EXPECT_NE(f.find("\n240,"), std::string::npos);
}

TEST_F(CliTest, ExportAttention) {
  ASSERT_EQ(run(small("train", "a")).code, kExitOk);
  const std::string ck = (dir_ / "a" / "checkpoint.txt").string();
  const std::string single = (dir_ / "one.csv").string();
  // 240 rows split 0.6/0.2/0.2 put the test range at [192, 240).
  ASSERT_EQ(run({"export-attention", "--dataset", data_, "--checkpoint", ck, "--time", "200",
                 "--output", single})
                .code,
            kExitOk);
  EXPECT_EQ(line_count(slurp(single)), 2u);
  EXPECT_NE(slurp(single).find("\n200,"), std::string::npos);

  const std::string many = (dir_ / "many.csv").string();
  ASSERT_EQ(run({"export-attention", "--dataset", data_, "--checkpoint", ck, "--range",
                 "210:215", "--output", many})
                .code,
            kExitOk);
  EXPECT_EQ(line_count(slurp(many)), 6u);

  EXPECT_EQ(run({"export-attention", "--dataset", data_, "--checkpoint", ck, "--time", "100",
                 "--output", many})
                .code,
            kExitUsage);
  EXPECT_EQ(run({"export-attention", "--dataset", data_, "--checkpoint", ck, "--range",
                 "230:245", "--output", many})
                .code,
            kExitUsage);
  EXPECT_EQ(run({"export-attention", "--dataset", data_, "--checkpoint", ck}).code, kExitUsage);
}

TEST_F(CliTest, GridSearchTable) {
  auto args = small("grid-search", "g");
  args.insert(args.end(), {"--grid-hidden", "2,4", "--grid-lr", "0.001,0.01"});
  const CliResult r = run(args);
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const std::string table = slurp(dir_ / "g" / "grid.csv");
  EXPECT_EQ(line_count(table), 5u);
  EXPECT_EQ(table.find("error"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir_ / "g" / "checkpoint.txt"));
}

TEST_F(CliTest, BaselinesOnSmoothSignal) {
  const CliResult ar = run({"baseline", "--method", "ar", "--dataset", data_, "--windows",
                            "1,2,4,8", "--output-dir", (dir_ / "b").string()});
  ASSERT_EQ(ar.code, kExitOk) << ar.err;
  const std::string json = slurp(dir_ / "b" / "baseline_ar_metrics.json");
  const auto corr_at = json.find("\"corr\": ");
  ASSERT_NE(corr_at, std::string::npos);
  EXPECT_GT(std::stod(json.substr(corr_at + 8)), 0.99);
  EXPECT_EQ(line_count(slurp(dir_ / "b" / "baseline_ar_grid.csv")), 5u);

  const CliResult ridge = run({"baseline", "--method", "ridge", "--dataset", data_, "--lambdas",
                               "1e9", "--windows", "4", "--output-dir", (dir_ / "b").string()});
  ASSERT_EQ(ridge.code, kExitOk) << ridge.err;
  const std::string rj = slurp(dir_ / "b" / "baseline_ridge_metrics.json");
  const auto rrse_at = rj.find("\"rrse\": ");
  ASSERT_NE(rrse_at, std::string::npos);
  EXPECT_NEAR(std::stod(rj.substr(rrse_at + 8)), 1.0, 0.05);

  EXPECT_EQ(run({"baseline", "--method", "ar", "--dataset", data_, "--lambdas", "1"}).code,
            kExitUsage);
}

TEST_F(CliTest, SynthIsSeeded) {
  const std::string a = (dir_ / "s1.csv").string();
  const std::string b = (dir_ / "s2.csv").string();
  ASSERT_EQ(run({"synth", "--length", "50", "--variables", "3", "--seed", "4", "--output", a})
                .code,
            kExitOk);
  ASSERT_EQ(run({"synth", "--length", "50", "--variables", "3", "--seed", "4", "--output", b})
                .code,
            kExitOk);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_EQ(line_count(slurp(a)), 50u);
  EXPECT_EQ(run({"synth", "--length", "50"}).code, kExitUsage);
}

TEST_F(CliTest, BundledDatasetBeatsTheMean) {
  const std::string bundled = std::string(MTNET_DATA_DIR) + "/synthetic_periodic.csv";
  const std::string out = (dir_ / "bundled").string();
  const CliResult t = run({"train", "--dataset", bundled, "--memory-blocks", "2", "--window", "24",
                           "--hidden", "8", "--filters", "8", "--max-epochs", "8",
                           "--learning-rate", "0.005", "--batch-size", "32", "--output-dir", out});
  ASSERT_EQ(t.code, kExitOk) << t.err;
  const CliResult e = run({"evaluate", "--dataset", bundled, "--checkpoint",
                           out + "/checkpoint.txt", "--output-dir", out});
  ASSERT_EQ(e.code, kExitOk) << e.err;
  const std::string json = slurp(dir_ / "bundled" / "eval_metrics.json");
  const auto at = json.find("\"rrse\": ");
  ASSERT_NE(at, std::string::npos);
  EXPECT_LT(std::stod(json.substr(at + 8)), 1.0);
}

TEST(CheckpointRoundTrip, PredictionsAreBitIdentical) {
  MTNetConfig cfg = testing::tiny_config();
  cfg.variables = 3;
  cfg.targets = {0, 2};
  const MTNetModel model = MTNetModel::create(cfg, 17);
  Checkpoint ck;
  ck.config = cfg;
  ck.params = model.params;
  Rng rng(3);
  const Tensor raw = testing::random_tensor(Shape{3, 300}, rng, -5.0, 5.0);
  ck.scaler = Scaler::fit(raw, {0, 200});
  ck.seed = 17;
  const fs::path p = fs::temp_directory_path() / "mtnet_ckpt_roundtrip.txt";
  save_checkpoint(ck, p.string());
  const Checkpoint back = load_checkpoint(p.string());
  fs::remove(p);
  EXPECT_EQ(serialize_checkpoint(back), serialize_checkpoint(ck));
  const MTNetModel loaded{back.config, back.params};
  const Tensor scaled = back.scaler.apply(raw);
  EXPECT_EQ(scaled, ck.scaler.apply(raw));
  const SampleSet set = make_samples(scaled, cfg, {0, 300});
  ASSERT_GE(set.size(), 100u);
  for (std::size_t i = 0; i < 100; ++i) {
    EXPECT_EQ(predict(loaded, set[i]).value, predict(model, set[i]).value) << i;
  }
}

}  // namespace
}  // namespace mtnet
