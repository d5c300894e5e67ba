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

#ifndef GALD_NORMAL_MODEL_H_
#define GALD_NORMAL_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "nlohmann/json.hpp"
#include "gald/dataset.h"

namespace gald {

struct KMeansOptions {
  std::size_t clusters = 5;
  std::size_t max_iter = 100;
  // Stop once no center moves farther than this.
  double tol = 1e-6;
};

// Normal patterns: k-means centers fit on observed normals.
struct ClusterModel {
  Matrix centers;
  // Sum over the fitted points of the (unsquared) distance to the nearest
  // center.
  double objective = 0.0;
  std::size_t iterations = 0;
  // Sum of squared distances after seeding and after every Lloyd step.
  std::vector<double> squared_objective_trace;

  std::size_t k() const { return centers.rows(); }
  std::size_t dims() const { return centers.cols(); }

  // Euclidean distance from x to the nearest center.
  double NearestDistance(std::span<const double> x) const;

  nlohmann::json ToJson() const;
  static ClusterModel FromJson(const nlohmann::json& doc);
};

// Lloyd iterations from k-means++ seeding. An empty cluster is re-seeded with
// the point farthest from its assigned center. Throws ConfigError when fewer
// than k points are given.
ClusterModel FitKMeans(const Matrix& points, const KMeansOptions& options,
                       std::uint64_t seed);

// Global normal score exp(-d^2), d the distance to the nearest center.
double GlobalNormalScore(const ClusterModel& model, std::span<const double> x);
std::vector<double> GlobalNormalScores(const ClusterModel& model,
                                       const Matrix& points,
                                       std::span<const std::size_t> rows);

// Sum of unsquared distances from each point to its nearest center.
double KMeansObjective(const ClusterModel& model, const Matrix& points);

}  // namespace gald

#endif  // GALD_NORMAL_MODEL_H_
