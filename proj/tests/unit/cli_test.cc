/*
 * Copyright 2026 The GALDetector Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "gald_cli/cli.h"

#include <cmath>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "gald/dataset.h"
#include "gald/eval.h"
#include "gald/pipeline.h"
#include "test_util.h"

namespace gald::cli {
namespace {

using ::testing::HasSubstr;

struct CliRun {
  int status;
  std::string out;
  std::string err;
};

CliRun Cli(std::vector<std::string> args) {
  args.insert(args.begin(), "galdetector");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int status =
      RunCli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {status, out.str(), err.str()};
}

std::string WriteData(const std::filesystem::path& dir) {
  Dataset data = GenerateSynthetic(400, 20, 3, 2).dataset;
  data.label_name = "label";
  const auto path = (dir / "d.csv").string();
  WriteCsv(data, path);
  return path;
}

TEST(Cli, TrainWritesModelAndReportsProgress) {
  const auto dir = gald::testing::TestDir();
  const std::string data = WriteData(dir);
  const std::string model = (dir / "m.json").string();
  const CliRun run = Cli({"train", "--data", data, "--label-col", "label",
                       "--out", model, "--seed", "7"});
  ASSERT_EQ(run.status, kOk) << run.err;
  EXPECT_TRUE(std::filesystem::exists(model));
  EXPECT_THAT(run.out, HasSubstr("stage sparsity_forest"));
  EXPECT_THAT(run.out, HasSubstr("selected "));
  EXPECT_THAT(run.out, HasSubstr("\"seed\":7"));
  EXPECT_EQ(PipelineModel::Load(model).config.seed, 7u);
}

TEST(Cli, MissingDataFileExitsTwoWithPath) {
  const auto dir = gald::testing::TestDir();
  const CliRun run = Cli({"train", "--data", "/no/such/file.csv", "--out",
                       (dir / "m.json").string()});
  EXPECT_EQ(run.status, kDataError);
  EXPECT_THAT(run.err, HasSubstr("/no/such/file.csv"));
}

TEST(Cli, DeltaFlagSetsSelectionCount) {
  const auto dir = gald::testing::TestDir();
  const CliRun run = Cli({"train", "--data", WriteData(dir), "--out",
                       (dir / "m.json").string(), "--delta", "0.10"});
  ASSERT_EQ(run.status, kOk) << run.err;
  std::smatch match;
  ASSERT_TRUE(std::regex_search(run.out, match,
                                std::regex(R"(selected (\d+) of (\d+) unlabeled)")));
  const double selected = std::stod(match[1]);
  const double unlabeled = std::stod(match[2]);
  EXPECT_EQ(selected, std::ceil(0.10 * unlabeled));
}

TEST(Cli, ConfigErrorsExitOne) {
  const auto dir = gald::testing::TestDir();
  const std::string data = WriteData(dir);
  const std::string model = (dir / "m.json").string();
  EXPECT_EQ(Cli({"train", "--data", data, "--out", model, "--delta", "1.5"})
                .status,
            kConfigError);
  EXPECT_EQ(Cli({"train", "--data", data, "--out", model, "--bogus"}).status,
            kConfigError);
  EXPECT_EQ(Cli({"train", "--data", data, "--out", model, "--config",
                 (dir / "missing.json").string()})
                .status,
            kConfigError);
  EXPECT_EQ(Cli({}).status, kConfigError);
  EXPECT_EQ(Cli({"--help"}).status, kOk);
}

TEST(Cli, PipelineErrorsExitThree) {
  const auto dir = gald::testing::TestDir();
  const CliRun run = Cli({"train", "--data", WriteData(dir), "--out",
                       (dir / "m.json").string(), "--k", "100000"});
  EXPECT_EQ(run.status, kPipelineError);
  EXPECT_THAT(run.err, HasSubstr("normal_model"));
}

TEST(Cli, FlagsOverrideConfigFile) {
  const auto dir = gald::testing::TestDir();
  const std::string config = gald::testing::WriteText(
      dir / "c.json", R"({"delta": 0.2, "trees": 9})");
  const std::string model = (dir / "m.json").string();
  const CliRun run = Cli({"train", "--data", WriteData(dir), "--out", model,
                       "--config", config, "--delta", "0.07"});
  ASSERT_EQ(run.status, kOk) << run.err;
  const PipelineModel loaded = PipelineModel::Load(model);
  EXPECT_EQ(loaded.config.fusion.delta, 0.07);
  EXPECT_EQ(loaded.config.forest.num_trees, 9u);
  EXPECT_THAT(run.out, HasSubstr("\"trees\":9"));
}

TEST(Cli, ScoreReproducesTestAucAndThresholdColumn) {
  const auto dir = gald::testing::TestDir();
  const std::string model = (dir / "m.json").string();
  const std::string report = (dir / "r.json").string();
  const std::string test = (dir / "test.csv").string();
  const std::string curve = (dir / "curve.csv").string();
  const std::string scores_out = (dir / "scores.csv").string();
  ASSERT_EQ(Cli({"train", "--data", WriteData(dir), "--out", model, "--seed",
                 "3", "--report-out", report, "--test-out", test,
                 "--curve-out", curve, "--scores-out", scores_out})
                .status,
            kOk);
  EXPECT_TRUE(std::filesystem::exists(curve));
  EXPECT_TRUE(std::filesystem::exists(scores_out));

  const std::string scored = (dir / "s.csv").string();
  const CliRun run = Cli({"score", "--model", model, "--data", test,
                       "--label-col", "label", "--threshold", "0.5", "--out",
                       scored});
  ASSERT_EQ(run.status, kOk) << run.err;

  const Dataset table = LoadCsv(scored);
  ASSERT_THAT(table.feature_names,
              ::testing::ElementsAre("index", "score", "label", "true_label"));
  std::vector<double> scores;
  std::vector<int> truth;
  const PipelineModel loaded = PipelineModel::Load(model);
  for (std::size_t i = 0; i < table.size(); ++i) {
    scores.push_back(table.features(i, 1));
    truth.push_back(static_cast<int>(table.features(i, 3)));
    EXPECT_EQ(table.features(i, 2), table.features(i, 1) >= 0.5 ? 1.0 : 0.0);
  }
  const auto doc =
      nlohmann::json::parse(gald::testing::ReadText(report));
  EXPECT_EQ(Auc(scores, truth), doc.at("test_report").at("auc").get<double>());
  EXPECT_THAT(run.out, HasSubstr("auc "));
}

TEST(Cli, ScoreToStdoutAndDimensionMismatch) {
  const auto dir = gald::testing::TestDir();
  const std::string data = WriteData(dir);
  const std::string model = (dir / "m.json").string();
  ASSERT_EQ(Cli({"train", "--data", data, "--out", model}).status, kOk);
  const CliRun good = Cli({"score", "--model", model, "--data", data,
                        "--label-col", "label"});
  ASSERT_EQ(good.status, kOk) << good.err;
  EXPECT_THAT(good.out, ::testing::StartsWith("index,score,true_label\n0,"));
  EXPECT_THAT(good.err, HasSubstr("auc"));
  // Without --label-col the label column is read as a fourth feature.
  const CliRun bad = Cli({"score", "--model", model, "--data", data});
  EXPECT_EQ(bad.status, kDataError);
  EXPECT_THAT(bad.err, HasSubstr("expects 3 features"));
}

TEST(Cli, MalformedModelExitsTwo) {
  const auto dir = gald::testing::TestDir();
  const std::string model =
      gald::testing::WriteText(dir / "m.json", R"({"format": 1})");
  EXPECT_EQ(Cli({"inspect", model}).status, kDataError);
  EXPECT_EQ(Cli({"score", "--model", model, "--data", WriteData(dir)}).status,
            kDataError);
}

TEST(Cli, InspectSummarizesModel) {
  const auto dir = gald::testing::TestDir();
  const std::string model = (dir / "m.json").string();
  ASSERT_EQ(Cli({"train", "--data", WriteData(dir), "--out", model, "--trees",
                 "6"})
                .status,
            kOk);
  const CliRun run = Cli({"inspect", model});
  ASSERT_EQ(run.status, kOk) << run.err;
  EXPECT_THAT(run.out, HasSubstr("galdetector-model v1"));
  EXPECT_THAT(run.out, HasSubstr("sparsity_forest trees=6"));
  EXPECT_THAT(run.out, HasSubstr("cluster_model k=5"));
  EXPECT_THAT(run.out, HasSubstr("detector trees=100"));
}

TEST(Cli, BenchmarkWritesReportAndFlagsFailures) {
  const auto dir = gald::testing::TestDir();
  const auto data_dir = dir / "data";
  std::filesystem::create_directories(data_dir);
  WriteData(data_dir);
  const std::string report = (dir / "bench.json").string();
  const CliRun ok = Cli({"benchmark", "--data", data_dir.string(), "--runs", "2",
                      "--trees", "5", "--out", report, "--no-timings"});
  ASSERT_EQ(ok.status, kOk) << ok.err;
  EXPECT_THAT(ok.out, HasSubstr("AUC"));
  const auto doc = nlohmann::json::parse(gald::testing::ReadText(report));
  EXPECT_EQ(doc.at("datasets").at(0).at("runs").size(), 2u);
  EXPECT_EQ(doc.at("config").at("trees").get<int>(), 5);

  gald::testing::WriteText(data_dir / "zz_broken.csv", "a,label\n1,3\n");
  const CliRun failed =
      Cli({"benchmark", "--data", data_dir.string(), "--runs", "1"});
  EXPECT_EQ(failed.status, kPipelineError);
  EXPECT_THAT(failed.out, HasSubstr("FAILED"));
  EXPECT_THAT(failed.out, HasSubstr("d "));
}

}  // namespace
}  // namespace gald::cli
