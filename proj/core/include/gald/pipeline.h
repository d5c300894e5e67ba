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

#ifndef GALD_PIPELINE_H_
#define GALD_PIPELINE_H_

// End-to-end detector training from observed normals:
//   1. normalize on the training pool,
//   2. sparsity forest on the training pool, k-means on observed normals,
//   3. local sparsity and global normal scores for the unlabeled samples,
//   4. fused score, top-delta selection and weights,
//   5. weighted boosted trees on observed normals plus selected samples,
//   6. scoring and evaluation of the held-out test samples.
// No stage reads the test partition before step 6.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nlohmann/json.hpp"
#include "gald/dataset.h"
#include "gald/detector.h"
#include "gald/eval.h"
#include "gald/normal_model.h"
#include "gald/scoring.h"
#include "gald/sparsity_forest.h"

namespace gald {

struct SplitParams {
  double train_frac = 0.8;
  double observed_normal_frac = 0.2;
};

struct PipelineConfig {
  ForestConfig forest;
  KMeansOptions clusters;
  FusionParams fusion;
  DetectorParams detector;
  SplitParams split;
  std::uint64_t seed = 0;

  // Throws ConfigError on out-of-range values.
  void Validate() const;

  // Flat object with one key per parameter.
  nlohmann::json ToJson() const;
  // Overrides the fields of `base` named in `doc`; unknown keys and
  // mistyped values raise ConfigError.
  static PipelineConfig FromJson(const nlohmann::json& doc,
                                 PipelineConfig base);
  static PipelineConfig FromJson(const nlohmann::json& doc);
};

PipelineConfig LoadConfigFile(const std::string& path);

// Everything needed to score new raw rows.
struct PipelineModel {
  static constexpr int kFormatVersion = 1;
  static constexpr const char* kFormatName = "galdetector-model";

  PipelineConfig config;
  Normalizer normalizer;
  SparsityForest forest;
  ClusterModel clusters;
  Detector detector;
  std::vector<std::string> feature_names;

  std::size_t dims() const { return normalizer.dims(); }

  // Anomaly probability of a raw (unnormalized) row.
  double Score(std::span<const double> raw) const;
  std::vector<double> ScoreRows(const Matrix& raw) const;

  nlohmann::json ToJson() const;
  static PipelineModel FromJson(const nlohmann::json& doc);
  void Save(const std::string& path) const;
  static PipelineModel Load(const std::string& path);
};

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct PipelineResult {
  PipelineModel model;
  ScoreTable scores;
  IndexSet selected;
  WeightedTrainingSet training;
  // Local sparsity and global normal scores of the observed normals, for
  // diagnostics only.
  std::vector<double> observed_lss;
  std::vector<double> observed_gns;
  // Detector outputs aligned with split.test and split.unlabeled.
  std::vector<double> test_scores;
  std::vector<double> unlabeled_scores;
  // Present when the corresponding partition holds both classes.
  std::optional<EvalReport> test_report;
  std::optional<EvalReport> unlabeled_report;
  std::vector<StageTiming> timings;

  std::size_t observed_count = 0;
  std::size_t unlabeled_count = 0;
  std::size_t test_count = 0;
  // Ground-truth anomalies among the selected and among all unlabeled
  // samples, when labels are known.
  std::optional<std::size_t> selected_true_anomalies;
  std::optional<std::size_t> unlabeled_true_anomalies;

  // Deterministic summary (no timings).
  nlohmann::json ReportJson() const;
};

// Throws PipelineError naming the failing stage, ConfigError for invalid
// configuration, DataError for an invalid split.
PipelineResult RunPipeline(const Dataset& data, const ScenarioSplit& split,
                           const PipelineConfig& config);

}  // namespace gald

#endif  // GALD_PIPELINE_H_
