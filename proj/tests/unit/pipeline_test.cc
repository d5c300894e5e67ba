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

#include "gald/pipeline.h"

#include <cmath>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "checks.h"
#include "gald/errors.h"
#include "gald/scoring.h"
#include "test_util.h"

namespace gald {
namespace {

using ::testing::HasSubstr;

struct Fixture {
  Dataset data;
  ScenarioSplit split;
};

Fixture Synthetic(std::uint64_t seed, const PipelineConfig& config) {
  Fixture f;
  f.data = GenerateSynthetic(500, 25, 4, seed).dataset;
  f.split = SplitScenario(f.data, config.seed, config.split.train_frac,
                          config.split.observed_normal_frac);
  return f;
}

TEST(RunPipeline, PlantedAnomaliesAreFoundAcrossSeeds) {
  const auto sweep = testing::RunSyntheticSweep(1, 10, 0.95);
  EXPECT_GE(sweep.mean_auc, 0.95);
  EXPECT_GE(sweep.min_auc, 0.85);
  EXPECT_GE(sweep.min_selected_fraction, 0.60);
}

TEST(RunPipeline, StagesRunInOrder) {
  PipelineConfig config;
  config.seed = 3;
  const Fixture f = Synthetic(3, config);
  const PipelineResult result = RunPipeline(f.data, f.split, config);
  std::vector<std::string> stages;
  for (const auto& t : result.timings) stages.push_back(t.stage);
  EXPECT_THAT(stages,
              ::testing::ElementsAre("normalize", "sparsity_forest",
                                     "normal_model", "local_global_scores",
                                     "fusion", "selection", "weighting",
                                     "detector", "evaluation"));
  EXPECT_EQ(result.scores.size(), f.split.unlabeled.size());
  EXPECT_EQ(result.test_scores.size(), f.split.test.size());
  EXPECT_EQ(result.observed_lss.size(), f.split.observed_normals.size());
  EXPECT_EQ(result.observed_gns.size(), f.split.observed_normals.size());
  ASSERT_TRUE(result.test_report.has_value());
}

TEST(RunPipeline, DeltaFivePercentOfThousandTrainsOnFiftyAnomalies) {
  // 1000 unlabeled, 200 observed normals, 100 test.
  const Dataset data = GenerateSynthetic(1250, 50, 3, 4).dataset;
  ScenarioSplit split;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (i < 200) {
      split.observed_normals.push_back(i);
    } else if (i < 1150 || (i >= 1250 && i < 1300 && i % 2 == 0)) {
      split.unlabeled.push_back(i);
    } else {
      split.test.push_back(i);
    }
  }
  // 950 normals + 25 anomalies is 975 so far; add 25 more normals.
  while (split.unlabeled.size() < 1000) {
    split.unlabeled.push_back(split.test.front());
    split.test.erase(split.test.begin());
  }
  std::sort(split.unlabeled.begin(), split.unlabeled.end());
  ASSERT_EQ(split.unlabeled.size(), 1000u);

  PipelineConfig config;
  config.fusion.delta = 0.05;
  const PipelineResult result = RunPipeline(data, split, config);
  EXPECT_EQ(result.selected.size(), 50u);
  EXPECT_EQ(result.training.CountLabel(1), 50u);
  EXPECT_EQ(result.training.CountLabel(0), 200u);
  EXPECT_EQ(result.training.samples.size(), 250u);
}

TEST(RunPipeline, DeterministicUnderFixedSeed) {
  const auto result = testing::CheckDeterminism(100, 71);
  EXPECT_TRUE(result.passed) << result.detail;
}

TEST(RunPipeline, TestPartitionNeverInfluencesTheModel) {
  PipelineConfig config;
  config.seed = 12;
  config.forest.num_trees = 10;
  const Fixture f = Synthetic(12, config);
  const PipelineResult a = RunPipeline(f.data, f.split, config);
  Dataset changed = f.data;
  for (const std::size_t i : f.split.test) {
    for (std::size_t j = 0; j < changed.dims(); ++j) {
      changed.features(i, j) = 1e6 * (j + 1);
    }
    (*changed.labels)[i] = 1 - (*changed.labels)[i];
  }
  const PipelineResult b = RunPipeline(changed, f.split, config);
  EXPECT_EQ(a.model.ToJson().dump(), b.model.ToJson().dump());
}

TEST(RunPipeline, ErrorsNameTheirStage) {
  PipelineConfig config;
  config.clusters.clusters = 1000;
  const Fixture f = Synthetic(5, config);
  try {
    RunPipeline(f.data, f.split, config);
    FAIL() << "expected PipelineError";
  } catch (const PipelineError& e) {
    EXPECT_EQ(e.stage(), "normal_model");
    EXPECT_THAT(e.what(), HasSubstr("normal_model"));
  }
}

TEST(RunPipeline, ValidatesConfigAndSplit) {
  PipelineConfig config;
  const Fixture f = Synthetic(6, config);
  PipelineConfig bad = config;
  bad.fusion.delta = 1.5;
  EXPECT_THROW(RunPipeline(f.data, f.split, bad), ConfigError);
  ScenarioSplit broken = f.split;
  broken.test.push_back(broken.unlabeled.front());
  EXPECT_THROW(RunPipeline(f.data, broken, config), DataError);
}

TEST(PipelineModel, ScoresMatchTrainingTimeDiagnostics) {
  PipelineConfig config;
  config.seed = 8;
  const Fixture f = Synthetic(8, config);
  const PipelineResult result = RunPipeline(f.data, f.split, config);
  const std::vector<double> test =
      result.model.ScoreRows(f.data.features.Rows(f.split.test));
  EXPECT_EQ(test, result.test_scores);
  const std::vector<double> unlabeled =
      result.model.ScoreRows(f.data.features.Rows(f.split.unlabeled));
  EXPECT_EQ(unlabeled, result.unlabeled_scores);
}

TEST(PipelineModel, SaveLoadReproducesPredictionsBitExactly) {
  PipelineConfig config;
  config.seed = 9;
  const Fixture f = Synthetic(9, config);
  const PipelineResult result = RunPipeline(f.data, f.split, config);
  const auto path = (testing::TestDir() / "model.json").string();
  result.model.Save(path);
  const PipelineModel loaded = PipelineModel::Load(path);
  EXPECT_EQ(loaded.ToJson().dump(), result.model.ToJson().dump());
  EXPECT_EQ(loaded.ScoreRows(f.data.features),
            result.model.ScoreRows(f.data.features));
  EXPECT_EQ(loaded.forest.ScoreRows(f.data.features, f.split.test),
            result.model.forest.ScoreRows(f.data.features, f.split.test));
}

TEST(PipelineModel, LoadRejectsBadDocuments) {
  const auto dir = testing::TestDir();
  EXPECT_THROW(PipelineModel::Load((dir / "missing.json").string()),
               DataError);
  EXPECT_THROW(PipelineModel::Load(testing::WriteText(dir / "a.json", "{")),
               DataError);
  EXPECT_THROW(PipelineModel::Load(testing::WriteText(
                   dir / "b.json", R"({"format":"other","version":1})")),
               DataError);
  EXPECT_THROW(PipelineModel::Load(testing::WriteText(
                   dir / "c.json",
                   R"({"format":"galdetector-model","version":99})")),
               DataError);
}

TEST(PipelineModel, RejectsDimensionMismatch) {
  PipelineConfig config;
  const Fixture f = Synthetic(10, config);
  const PipelineResult result = RunPipeline(f.data, f.split, config);
  EXPECT_THROW(result.model.ScoreRows(Matrix(2, 3)), DataError);
}

TEST(PipelineConfig, JsonRoundTripAndOverrides) {
  PipelineConfig config;
  config.seed = 99;
  config.forest.num_trees = 7;
  config.forest.aggregation = Aggregation::kMax;
  config.fusion.mu = 0.25;
  config.detector.rounds = 3;
  config.split.train_frac = 0.6;
  const PipelineConfig back = PipelineConfig::FromJson(config.ToJson());
  EXPECT_EQ(back.ToJson(), config.ToJson());

  const PipelineConfig partial =
      PipelineConfig::FromJson(nlohmann::json{{"delta", 0.1}}, config);
  EXPECT_EQ(partial.fusion.delta, 0.1);
  EXPECT_EQ(partial.forest.num_trees, 7u);
}

TEST(PipelineConfig, RejectsUnknownKeysAndBadTypes) {
  EXPECT_THROW(PipelineConfig::FromJson(nlohmann::json{{"tress", 5}}),
               ConfigError);
  EXPECT_THROW(PipelineConfig::FromJson(nlohmann::json{{"trees", -5}}),
               ConfigError);
  EXPECT_THROW(PipelineConfig::FromJson(nlohmann::json{{"delta", "x"}}),
               ConfigError);
  EXPECT_THROW(PipelineConfig::FromJson(nlohmann::json::array()), ConfigError);
}

TEST(PipelineConfig, FractionsAndCountsAreValidated) {
  PipelineConfig config;
  EXPECT_NO_THROW(config.Validate());
  for (const double bad : {0.0, 1.0, -0.1}) {
    PipelineConfig c;
    c.split.train_frac = bad;
    EXPECT_THROW(c.Validate(), ConfigError);
    c = {};
    c.split.observed_normal_frac = bad;
    EXPECT_THROW(c.Validate(), ConfigError);
  }
  PipelineConfig c;
  c.clusters.clusters = 0;
  EXPECT_THROW(c.Validate(), ConfigError);
  c = {};
  c.detector.rounds = 0;
  EXPECT_THROW(c.Validate(), ConfigError);
  c = {};
  c.forest.max_depth = 0;
  EXPECT_THROW(c.Validate(), ConfigError);
}

TEST(LoadConfigFile, ReadsFlatJson) {
  const auto dir = testing::TestDir();
  const PipelineConfig config = LoadConfigFile(
      testing::WriteText(dir / "c.json", R"({"trees": 12, "mu": 2})"));
  EXPECT_EQ(config.forest.num_trees, 12u);
  EXPECT_EQ(config.fusion.mu, 2.0);
  EXPECT_THROW(LoadConfigFile((dir / "none.json").string()), ConfigError);
  EXPECT_THROW(LoadConfigFile(testing::WriteText(dir / "bad.json", "{x")),
               ConfigError);
}

}  // namespace
}  // namespace gald
