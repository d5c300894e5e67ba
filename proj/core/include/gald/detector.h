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

#ifndef GALD_DETECTOR_H_
#define GALD_DETECTOR_H_

// Weighted gradient boosted trees with logistic loss. Every sample's gradient
// and hessian are scaled by its weight, so the model minimizes
//   sum_i w_i * logloss(y_i, f(x_i)) + regularization
// where the regularization penalizes squared leaf values (lambda) and the
// number of leaves (gamma).

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "nlohmann/json.hpp"
#include "gald/dataset.h"
#include "gald/scoring.h"

namespace gald {

struct DetectorParams {
  std::size_t rounds = 100;
  double learning_rate = 0.1;
  std::size_t max_depth = 4;
  // L2 penalty on leaf values.
  double lambda = 1.0;
  // Penalty per additional leaf; a split must gain more than this.
  double gamma = 0.0;
  // Minimum weighted hessian on each side of a split.
  double min_child_weight = 0.0;
  // Row sampling rate per round; 1 disables sampling.
  double subsample = 1.0;

  void Validate() const;
};

class RegressionTree {
 public:
  struct Node {
    std::size_t feature = 0;
    double threshold = 0.0;
    // Children indices; both zero for leaves.
    std::size_t left = 0;
    std::size_t right = 0;
    double value = 0.0;

    bool is_leaf() const { return left == 0 && right == 0; }
    bool operator==(const Node&) const = default;
  };

  RegressionTree() = default;
  explicit RegressionTree(std::vector<Node> nodes) : nodes_(std::move(nodes)) {}

  // Samples with x[feature] < threshold go left.
  double Predict(std::span<const double> x) const;
  std::size_t FindLeaf(std::span<const double> x) const;

  const std::vector<Node>& nodes() const { return nodes_; }

  nlohmann::json ToJson() const;
  static RegressionTree FromJson(const nlohmann::json& doc);

  bool operator==(const RegressionTree&) const = default;

 private:
  nlohmann::json NodeToJson(std::size_t id) const;
  std::vector<Node> nodes_;
};

class Detector {
 public:
  Detector() = default;
  Detector(DetectorParams params, std::size_t dims, double base_score,
           std::vector<RegressionTree> trees);

  // Raw additive output: base score plus learning_rate times tree outputs.
  double Margin(std::span<const double> x) const;
  // Anomaly probability in (0,1).
  double PredictScore(std::span<const double> x) const;
  std::vector<double> PredictRows(const Matrix& features,
                                  std::span<const std::size_t> rows) const;
  // 1 iff PredictScore(x) >= threshold.
  int Classify(std::span<const double> x, double threshold) const;

  const DetectorParams& params() const { return params_; }
  std::size_t dims() const { return dims_; }
  double base_score() const { return base_score_; }
  const std::vector<RegressionTree>& trees() const { return trees_; }

  // Weighted training loss (without regularization) before the first round
  // and after every round.
  const std::vector<double>& loss_trace() const { return loss_trace_; }

  nlohmann::json ToJson() const;
  static Detector FromJson(const nlohmann::json& doc);

 private:
  friend Detector TrainDetector(const Matrix&, std::span<const int>,
                                std::span<const double>, const DetectorParams&,
                                std::uint64_t);

  DetectorParams params_;
  std::size_t dims_ = 0;
  double base_score_ = 0.0;
  std::vector<RegressionTree> trees_;
  std::vector<double> loss_trace_;
};

// Trains on the rows of `features` with labels in {0,1} and positive weights.
// The base score is the log-odds of the weighted class prior. rounds = 0
// yields the prior-only model. Throws PipelineError unless both classes carry
// positive total weight.
Detector TrainDetector(const Matrix& features, std::span<const int> labels,
                       std::span<const double> weights,
                       const DetectorParams& params, std::uint64_t seed);

// Unit weights.
Detector TrainDetector(const Matrix& features, std::span<const int> labels,
                       const DetectorParams& params, std::uint64_t seed);

// Gathers the rows named by the training set from `normalized`.
Detector TrainDetector(const Matrix& normalized,
                       const WeightedTrainingSet& training,
                       const DetectorParams& params, std::uint64_t seed);

// Sum of w_i * logloss(y_i, margin_i).
double WeightedLogLoss(std::span<const double> margins,
                       std::span<const int> labels,
                       std::span<const double> weights);

}  // namespace gald

#endif  // GALD_DETECTOR_H_
