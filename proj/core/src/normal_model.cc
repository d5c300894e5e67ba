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

#include "gald/normal_model.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gald/errors.h"
#include "gald/parallel.h"
#include "gald/random.h"

namespace gald {
namespace {

double SquaredDistance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double diff = a[j] - b[j];
    sum += diff * diff;
  }
  return sum;
}

// Index of the nearest center and the squared distance to it.
std::pair<std::size_t, double> Nearest(const Matrix& centers,
                                       std::span<const double> x) {
  std::size_t best = 0;
  double best_sq = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centers.rows(); ++c) {
    const double sq = SquaredDistance(x, centers.row(c));
    if (sq < best_sq) {
      best_sq = sq;
      best = c;
    }
  }
  return {best, best_sq};
}

Matrix SeedCenters(const Matrix& points, std::size_t k, Rng& rng) {
  const std::size_t n = points.rows();
  Matrix centers(k, points.cols());
  std::vector<double> nearest_sq(n, std::numeric_limits<double>::infinity());

  std::size_t pick = UniformIndex(rng, n);
  for (std::size_t c = 0; c < k; ++c) {
    std::copy(points.row(pick).begin(), points.row(pick).end(),
              centers.row(c).begin());
    if (c + 1 == k) break;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      nearest_sq[i] =
          std::min(nearest_sq[i], SquaredDistance(points.row(i), centers.row(c)));
      total += nearest_sq[i];
    }
    if (total <= 0.0) {
      // Every point coincides with a chosen center.
      pick = UniformIndex(rng, n);
      continue;
    }
    const double draw = UniformUnit(rng) * total;
    double running = 0.0;
    pick = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
      running += nearest_sq[i];
      if (running > draw && nearest_sq[i] > 0.0) {
        pick = i;
        break;
      }
    }
  }
  return centers;
}

}  // namespace

double ClusterModel::NearestDistance(std::span<const double> x) const {
  if (x.size() != dims()) {
    throw DataError("cluster model expects " + std::to_string(dims()) +
                    " features, got " + std::to_string(x.size()));
  }
  return std::sqrt(Nearest(centers, x).second);
}

ClusterModel FitKMeans(const Matrix& points, const KMeansOptions& options,
                       std::uint64_t seed) {
  const std::size_t k = options.clusters;
  const std::size_t n = points.rows();
  if (k < 1) throw ConfigError("k-means needs k >= 1");
  if (n < k) {
    throw ConfigError("k-means needs at least k=" + std::to_string(k) +
                      " points, got " + std::to_string(n));
  }
  const std::size_t d = points.cols();
  Rng rng(seed);

  ClusterModel model;
  model.centers = SeedCenters(points, k, rng);

  std::vector<std::size_t> assignment(n);
  std::vector<double> sq_dist(n);
  auto assign = [&] {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto [c, sq] = Nearest(model.centers, points.row(i));
      assignment[i] = c;
      sq_dist[i] = sq;
      total += sq;
    }
    return total;
  };
  model.squared_objective_trace.push_back(assign());

  for (std::size_t iter = 0; iter < options.max_iter; ++iter) {
    Matrix sums(k, d);
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = points.row(i);
      auto sum = sums.row(assignment[i]);
      for (std::size_t j = 0; j < d; ++j) sum[j] += row[j];
      ++sizes[assignment[i]];
    }

    Matrix updated(k, d);
    std::vector<char> taken(n, 0);
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] > 0) {
        for (std::size_t j = 0; j < d; ++j) {
          updated(c, j) = sums(c, j) / static_cast<double>(sizes[c]);
        }
        continue;
      }
      // Empty cluster: move it onto the point farthest from its center.
      std::size_t far = 0;
      double far_sq = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (!taken[i] && sq_dist[i] > far_sq) {
          far_sq = sq_dist[i];
          far = i;
        }
      }
      taken[far] = 1;
      std::copy(points.row(far).begin(), points.row(far).end(),
                updated.row(c).begin());
    }

    double max_shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      max_shift = std::max(
          max_shift,
          std::sqrt(SquaredDistance(updated.row(c), model.centers.row(c))));
    }
    model.centers = std::move(updated);
    model.iterations = iter + 1;
    model.squared_objective_trace.push_back(assign());
    if (max_shift < options.tol) break;
  }

  model.objective = KMeansObjective(model, points);
  return model;
}

double GlobalNormalScore(const ClusterModel& model, std::span<const double> x) {
  const double d = model.NearestDistance(x);
  return std::exp(-d * d);
}

std::vector<double> GlobalNormalScores(const ClusterModel& model,
                                       const Matrix& points,
                                       std::span<const std::size_t> rows) {
  std::vector<double> scores(rows.size());
  ParallelFor(0, rows.size(), [&](std::size_t k) {
    scores[k] = GlobalNormalScore(model, points.row(rows[k]));
  });
  return scores;
}

double KMeansObjective(const ClusterModel& model, const Matrix& points) {
  double total = 0.0;
  for (std::size_t i = 0; i < points.rows(); ++i) {
    total += model.NearestDistance(points.row(i));
  }
  return total;
}

nlohmann::json ClusterModel::ToJson() const {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t c = 0; c < k(); ++c) {
    rows.push_back(std::vector<double>(centers.row(c).begin(),
                                       centers.row(c).end()));
  }
  return {{"centers", std::move(rows)},
          {"objective", objective},
          {"iterations", iterations}};
}

ClusterModel ClusterModel::FromJson(const nlohmann::json& doc) {
  ClusterModel model;
  const auto rows = doc.at("centers").get<std::vector<std::vector<double>>>();
  if (rows.empty() || rows.front().empty()) {
    throw DataError("cluster model has no centers");
  }
  model.centers = Matrix(rows.size(), rows.front().size());
  for (std::size_t c = 0; c < rows.size(); ++c) {
    if (rows[c].size() != model.centers.cols()) {
      throw DataError("cluster centers have inconsistent dimensions");
    }
    std::copy(rows[c].begin(), rows[c].end(), model.centers.row(c).begin());
  }
  model.objective = doc.at("objective").get<double>();
  model.iterations = doc.at("iterations").get<std::size_t>();
  return model;
}

}  // namespace gald
