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

#include "gald/benchmark.h"

#include <filesystem>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "gald/errors.h"
#include "test_util.h"

namespace gald {
namespace {

using ::testing::HasSubstr;

BenchmarkOptions SmallOptions(const std::filesystem::path& dir) {
  BenchmarkOptions options;
  options.data_dir = dir.string();
  options.runs = 3;
  options.master_seed = 5;
  options.config.forest.num_trees = 10;
  options.config.detector.rounds = 20;
  return options;
}

std::filesystem::path WriteSynthetic(const std::filesystem::path& dir,
                                     const std::string& name,
                                     std::uint64_t seed) {
  Dataset data = GenerateSynthetic(200, 10, 3, seed).dataset;
  data.label_name = "label";
  const auto path = dir / (name + ".csv");
  WriteCsv(data, path.string());
  return path;
}

TEST(FindReferenceShape, KnowsPublishedDatasets) {
  const auto thyroid = FindReferenceShape("Thyroid");
  ASSERT_TRUE(thyroid.has_value());
  EXPECT_EQ(thyroid->rows, 7200u);
  EXPECT_EQ(thyroid->dims, 6u);
  EXPECT_EQ(thyroid->anomalies, 534u);
  EXPECT_EQ(FindReferenceShape("annthyroid")->name, "Thyroid");
  EXPECT_EQ(FindReferenceShape("satimage2")->dims, 36u);
  EXPECT_EQ(FindReferenceShape("musk")->dims, 166u);
  EXPECT_EQ(FindReferenceShape("http")->rows, 567479u);
  EXPECT_FALSE(FindReferenceShape("unknown").has_value());
}

TEST(RunBenchmark, RunsEveryFileAndRecordsFailures) {
  const auto dir = testing::TestDir();
  WriteSynthetic(dir, "alpha", 1);
  WriteSynthetic(dir, "beta", 2);
  testing::WriteText(dir / "broken.csv", "a,label\n1,0\nx,1\n");
  testing::WriteText(dir / "notes.txt", "ignored");

  const BenchmarkReport report = RunBenchmark(SmallOptions(dir));
  ASSERT_EQ(report.datasets.size(), 3u);
  EXPECT_EQ(report.datasets[0].name, "alpha");
  EXPECT_EQ(report.datasets[1].name, "beta");
  EXPECT_EQ(report.datasets[2].name, "broken");
  EXPECT_FALSE(report.datasets[2].ok);
  EXPECT_THAT(report.datasets[2].error, HasSubstr("x"));
  for (int i = 0; i < 2; ++i) {
    const DatasetResult& d = report.datasets[i];
    ASSERT_TRUE(d.ok) << d.error;
    ASSERT_EQ(d.runs.size(), 3u);
    EXPECT_EQ(d.runs[0].seed, 5u);
    EXPECT_EQ(d.runs[2].seed, 7u);
    double sum = 0.0;
    for (const auto& run : d.runs) sum += run.auc;
    EXPECT_DOUBLE_EQ(d.mean_auc, sum / 3.0);
    // Two test anomalies per run; quality is asserted by the pipeline sweep.
    EXPECT_GT(d.mean_auc, 0.5);
    EXPECT_EQ(d.rows, 210u);
    EXPECT_EQ(d.anomalies, 10u);
  }
  const std::string table = report.FormatTable();
  EXPECT_THAT(table, HasSubstr("alpha"));
  EXPECT_THAT(table, HasSubstr("FAILED"));
  EXPECT_THAT(report.ToJson().dump(), HasSubstr("protocol"));
}

TEST(RunBenchmark, SameMasterSeedGivesIdenticalReports) {
  const auto dir = testing::TestDir();
  WriteSynthetic(dir, "alpha", 3);
  const BenchmarkReport a = RunBenchmark(SmallOptions(dir));
  const BenchmarkReport b = RunBenchmark(SmallOptions(dir));
  EXPECT_EQ(a.ToJson(false).dump(), b.ToJson(false).dump());
  EXPECT_THAT(a.ToJson(true).dump(), HasSubstr("timings"));
  EXPECT_THAT(a.ToJson(false).dump(), ::testing::Not(HasSubstr("timings")));
}

TEST(RunBenchmark, WarnsWhenAKnownNameHasTheWrongShape) {
  const auto dir = testing::TestDir();
  WriteSynthetic(dir, "thyroid", 4);
  const BenchmarkReport report = RunBenchmark(SmallOptions(dir));
  ASSERT_EQ(report.datasets.size(), 1u);
  ASSERT_EQ(report.datasets[0].warnings.size(), 1u);
  EXPECT_THAT(report.datasets[0].warnings[0], HasSubstr("7200"));
}

TEST(RunBenchmark, SubsamplesLargeDatasetsAndSaysSo) {
  const auto dir = testing::TestDir();
  WriteSynthetic(dir, "alpha", 5);
  BenchmarkOptions options = SmallOptions(dir);
  options.max_rows = 150;
  const BenchmarkReport report = RunBenchmark(options);
  const DatasetResult& d = report.datasets.at(0);
  EXPECT_TRUE(d.subsampled);
  EXPECT_EQ(d.rows, 150u);
  EXPECT_EQ(d.source_rows, 210u);
  EXPECT_THAT(report.FormatTable(), HasSubstr("subsampled"));
  EXPECT_THAT(ProtocolNote(options), HasSubstr("150"));
}

TEST(RunBenchmark, MissingDirectoryIsADataError) {
  BenchmarkOptions options;
  options.data_dir = "/nonexistent/bench";
  EXPECT_THROW(RunBenchmark(options), DataError);
  options.data_dir = testing::TestDir().string();
  EXPECT_THROW(RunBenchmark(options), DataError);
}

TEST(SubsampleRows, KeepsOriginalOrderAndIsSeeded) {
  Dataset data = GenerateSynthetic(90, 10, 2, 6).dataset;
  const Dataset a = SubsampleRows(data, 40, 11);
  const Dataset b = SubsampleRows(data, 40, 11);
  const Dataset c = SubsampleRows(data, 40, 12);
  EXPECT_EQ(a.size(), 40u);
  EXPECT_EQ(a.features, b.features);
  EXPECT_NE(a.features, c.features);
  EXPECT_EQ(SubsampleRows(data, 500, 1).size(), 100u);
}

}  // namespace
}  // namespace gald
