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

#ifndef GALD_SPARSITY_FOREST_H_
#define GALD_SPARSITY_FOREST_H_

// Local sparsity scoring with a forest of axis-aligned partition trees.
//
// Each tree recursively cuts the unit cube of normalized feature space. At
// every node, every coordinate is offered a cut into at most `partitions`
// intervals that maximizes the length-weighted variance of point density
// across the intervals; the coordinate with the largest variance wins. Leaves
// record the volume of their subcube and how many sample points fell inside.
// The sparsity of a leaf is volume / count, and the local sparsity score of a
// point aggregates the sparsity of the leaves containing it across the forest.

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "nlohmann/json.hpp"
#include "gald/dataset.h"

namespace gald {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  double length() const { return hi - lo; }
  bool operator==(const Interval&) const = default;
};

// Axis-aligned box inside [0,1]^d. Only coordinates that were split are
// tracked; the others span [0,1].
class Cube {
 public:
  Interval interval(std::size_t coordinate) const;
  void Restrict(std::size_t coordinate, Interval interval);
  // Product of the tracked interval lengths.
  double Volume() const;
  const std::map<std::size_t, Interval>& tracked() const { return tracked_; }

  bool operator==(const Cube&) const = default;

 private:
  std::map<std::size_t, Interval> tracked_;
};

struct SplitResult {
  std::size_t coordinate = 0;
  // Strictly increasing, strictly inside the node interval.
  std::vector<double> breakpoints;
  // Length-weighted variance of interval densities.
  double score = 0.0;
};

// Length-weighted density variance sum_i (len_i/L) (c_i/len_i - n/L)^2 of the
// partition of `interval` induced by `breakpoints`. Points equal to a
// breakpoint belong to the interval on its right.
double SplitObjective(std::span<const double> sorted_positions,
                      Interval interval, std::span<const double> breakpoints);

// Exact maximizer of SplitObjective over all partitions into at most
// max_intervals intervals whose breakpoints sit at midpoints between adjacent
// distinct positions. Ties resolve to the lexicographically smallest
// breakpoint list. Throws std::invalid_argument with fewer than two distinct
// positions or max_intervals < 2.
SplitResult BestSplit1D(std::span<const double> sorted_positions,
                        Interval interval, std::size_t max_intervals);

// Sparsity of a subcube holding `count` sample points. Empty cubes are capped
// at volume / 1.
inline double CubeSparsity(double volume, std::size_t count) {
  return volume / static_cast<double>(count == 0 ? 1 : count);
}

enum class Aggregation { kMean, kMax };

std::string AggregationName(Aggregation aggregation);
Aggregation ParseAggregation(const std::string& name);

struct ForestConfig {
  std::size_t num_trees = 50;
  // Maximum number of intervals per split.
  std::size_t partitions = 5;
  std::size_t max_depth = 10;
  // Per-tree sample size, capped at the number of available points.
  std::size_t subsample_size = 200;
  Aggregation aggregation = Aggregation::kMean;

  void Validate() const;
};

class SparsityTree {
 public:
  struct Node {
    Cube cube;
    std::size_t depth = 0;
    std::size_t count = 0;
    // Internal nodes only: split coordinate, cut points and one child per
    // interval, left to right.
    std::size_t coordinate = 0;
    std::vector<double> breakpoints;
    std::vector<std::size_t> children;
    // Leaves only.
    double sparsity = 0.0;

    bool is_leaf() const { return children.empty(); }
    bool operator==(const Node&) const = default;
  };

  // Builds a tree on `sample`, whose rows must lie in [0,1]^d. Splitting
  // stops at max_depth, at single-point nodes, and at nodes whose points all
  // coincide. Construction is deterministic.
  static SparsityTree Build(const Matrix& sample, std::size_t partitions,
                            std::size_t max_depth);

  // Index of the leaf containing x.
  std::size_t FindLeaf(std::span<const double> x) const;
  double Sparsity(std::span<const double> x) const {
    return nodes_[FindLeaf(x)].sparsity;
  }

  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& root() const { return nodes_.front(); }
  std::size_t Depth() const;
  std::size_t NumLeaves() const;

  nlohmann::json ToJson() const;
  static SparsityTree FromJson(const nlohmann::json& doc);

  bool operator==(const SparsityTree&) const = default;

 private:
  std::vector<Node> nodes_;
};

// Forest over normalized data. Inputs to Fit and Score must already be
// mapped into [0,1]^d by the pipeline normalizer.
class SparsityForest {
 public:
  static constexpr int kFormatVersion = 1;

  static SparsityForest Fit(const Matrix& normalized, const ForestConfig& config,
                            std::uint64_t seed);

  // Local sparsity score: mean (or max) leaf sparsity across trees.
  double Score(std::span<const double> x) const;
  std::vector<double> ScoreRows(const Matrix& normalized,
                                std::span<const std::size_t> rows) const;

  const ForestConfig& config() const { return config_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t dims() const { return dims_; }
  const std::vector<SparsityTree>& trees() const { return trees_; }

  nlohmann::json ToJson() const;
  static SparsityForest FromJson(const nlohmann::json& doc);

  // Builds a forest from explicit trees (used by tests and deserialization).
  SparsityForest(ForestConfig config, std::uint64_t seed, std::size_t dims,
                 std::vector<SparsityTree> trees);
  SparsityForest() = default;

 private:
  ForestConfig config_;
  std::uint64_t seed_ = 0;
  std::size_t dims_ = 0;
  std::vector<SparsityTree> trees_;
};

}  // namespace gald

#endif  // GALD_SPARSITY_FOREST_H_
