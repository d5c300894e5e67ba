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

#ifndef GALD_EVAL_H_
#define GALD_EVAL_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "nlohmann/json.hpp"

namespace gald {

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  bool operator==(const ConfusionCounts&) const = default;
};

// One operating point: samples with score >= threshold are flagged.
struct PrPoint {
  double threshold = 0.0;
  double precision = 1.0;
  double recall = 0.0;
  ConfusionCounts counts;
};

struct F1Result {
  double f1 = 0.0;
  double threshold = 0.0;
};

struct EvalReport {
  double auc = 0.5;
  double best_f1 = 0.0;
  double best_threshold = 0.0;
  std::vector<PrPoint> pr_curve;
  ConfusionCounts at_best;

  nlohmann::json ToJson() const;
};

// 2TP / (2TP + FP + FN), the harmonic mean of precision and recall; 0 when
// nothing is detected.
double F1FromCounts(const ConfusionCounts& counts);

// Probability that a random positive outscores a random negative, ties
// counting one half (midrank Mann-Whitney statistic). Throws
// std::invalid_argument unless both classes are present.
double Auc(std::span<const double> scores, std::span<const int> labels);

// One point per distinct score, in descending threshold order, preceded by
// the empty-detection endpoint (threshold +inf, precision 1, recall 0).
// Throws std::invalid_argument without positives.
std::vector<PrPoint> PrCurve(std::span<const double> scores,
                             std::span<const int> labels);

// Largest F1 over the curve; ties go to the lowest threshold.
F1Result BestF1(std::span<const double> scores, std::span<const int> labels);

EvalReport Evaluate(std::span<const double> scores, std::span<const int> labels);

// threshold,precision,recall,tp,fp,fn,tn per curve point.
void WritePrCurveCsv(const EvalReport& report, const std::string& path);

}  // namespace gald

#endif  // GALD_EVAL_H_
