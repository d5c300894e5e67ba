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

#ifndef GALD_SCORING_H_
#define GALD_SCORING_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gald/dataset.h"

namespace gald {

struct FusionParams {
  // Weight of the global normal score against local sparsity.
  double mu = 1.0;
  // Fraction of unlabeled samples picked as potential anomalies.
  double delta = 0.05;
  // Training weight of every observed normal.
  double epsilon = 0.5;

  void Validate() const;
};

struct ScoreRecord {
  std::size_t index = 0;
  double lss_raw = 0.0;
  double lss_norm = 0.0;
  double gns = 0.0;
  double galscore_norm = 0.0;
};

// Fused scores over the unlabeled set.
struct ScoreTable {
  std::vector<ScoreRecord> records;
  double mu = 1.0;

  std::size_t size() const { return records.size(); }
};

// Min-max rescale to [0,1]; a constant vector maps to 0.5 everywhere.
std::vector<double> MinMaxRescale(std::span<const double> values);

// lss is min-max rescaled, combined as lss_norm - mu * gns, and the combined
// score min-max rescaled again. `indices` names the sample behind each entry.
ScoreTable GalScore(std::span<const std::size_t> indices,
                    std::span<const double> lss_raw,
                    std::span<const double> gns, double mu);

// Number of samples the delta rule selects out of n: ceil(delta * n).
std::size_t SelectionCount(double delta, std::size_t n);

// Sample indices of the ceil(delta * n) highest fused scores, ties going to
// the lower sample index. Returned in ascending index order.
IndexSet SelectPotentialAnomalies(const ScoreTable& table, double delta);

enum class Provenance { kObservedNormal, kSelectedAnomaly };

struct WeightedSample {
  std::size_t index = 0;
  int label = 0;
  double weight = 0.0;
  Provenance provenance = Provenance::kObservedNormal;
};

struct WeightedTrainingSet {
  std::vector<WeightedSample> samples;

  std::size_t CountLabel(int label) const;
};

// Smallest weight handed to a selected sample; applies only when the
// selection reaches the minimum fused score, whose ratio is exactly zero.
inline constexpr double kMinSelectedWeight = 1e-6;

// Selected samples get label 1 and weight score / max score over the
// selection; observed normals get label 0 and weight epsilon. Throws
// PipelineError when the best selected score is zero.
WeightedTrainingSet AssignWeights(const ScoreTable& table,
                                  std::span<const std::size_t> selected,
                                  std::span<const std::size_t> observed_normals,
                                  double epsilon);

// Diagnostics export: index, lss_raw, lss_norm, gns, galscore_norm,
// selected flag and training weight (empty when not selected).
void WriteScoreTableCsv(const ScoreTable& table,
                        const WeightedTrainingSet& training,
                        const std::string& path);

}  // namespace gald

#endif  // GALD_SCORING_H_
