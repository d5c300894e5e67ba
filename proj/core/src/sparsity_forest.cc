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

#include "gald/sparsity_forest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>

#include "gald/errors.h"
#include "gald/parallel.h"
#include "gald/random.h"

namespace gald {
namespace {

// Relative slack under which two objective values count as tied.
constexpr double kTieTolerance = 1e-12;

bool Reaches(double value, double target) {
  return value >= target - kTieTolerance * std::max(1.0, std::abs(target));
}

// Breakpoint candidates and cumulative counts over the distinct positions.
// Boundary 0 is the interval start, boundary m the interval end and boundary
// t in [1, m) the cut between distinct values t-1 and t.
struct Boundaries {
  std::vector<double> position;
  std::vector<double> cumulative;
  std::vector<char> usable;

  std::size_t last() const { return position.size() - 1; }

  // Contribution count^2 / length of the interval between two boundaries.
  double Segment(std::size_t a, std::size_t b) const {
    const double count = cumulative[b] - cumulative[a];
    return count * count / (position[b] - position[a]);
  }
};

Boundaries MakeBoundaries(std::span<const double> sorted, Interval interval) {
  Boundaries out;
  out.position.push_back(interval.lo);
  out.cumulative.push_back(0.0);
  out.usable.push_back(1);
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i] == sorted[i - 1]) continue;
    const double left = sorted[i - 1];
    const double right = sorted[i];
    double cut = left + (right - left) / 2;
    // Adjacent doubles: the cut must stay right of `left` so that `left`
    // remains in the lower interval.
    if (!(cut > left)) cut = right;
    out.position.push_back(cut);
    out.cumulative.push_back(static_cast<double>(i));
    out.usable.push_back(cut > interval.lo && cut < interval.hi);
  }
  out.position.push_back(interval.hi);
  out.cumulative.push_back(static_cast<double>(sorted.size()));
  out.usable.push_back(1);
  return out;
}

}  // namespace

Interval Cube::interval(std::size_t coordinate) const {
  const auto it = tracked_.find(coordinate);
  return it == tracked_.end() ? Interval{} : it->second;
}

void Cube::Restrict(std::size_t coordinate, Interval interval) {
  tracked_[coordinate] = interval;
}

double Cube::Volume() const {
  double volume = 1.0;
  for (const auto& [coordinate, interval] : tracked_) {
    volume *= interval.length();
  }
  return volume;
}

double SplitObjective(std::span<const double> sorted_positions,
                      Interval interval, std::span<const double> breakpoints) {
  const std::size_t num_intervals = breakpoints.size() + 1;
  std::vector<double> counts(num_intervals, 0.0);
  for (const double x : sorted_positions) {
    const auto idx = static_cast<std::size_t>(
        std::upper_bound(breakpoints.begin(), breakpoints.end(), x) -
        breakpoints.begin());
    counts[idx] += 1.0;
  }
  const double total_length = interval.length();
  const double mean_density =
      static_cast<double>(sorted_positions.size()) / total_length;
  double objective = 0.0;
  for (std::size_t i = 0; i < num_intervals; ++i) {
    const double lo = i == 0 ? interval.lo : breakpoints[i - 1];
    const double hi = i + 1 == num_intervals ? interval.hi : breakpoints[i];
    const double length = hi - lo;
    const double deviation = counts[i] / length - mean_density;
    objective += (length / total_length) * deviation * deviation;
  }
  return objective;
}

SplitResult BestSplit1D(std::span<const double> sorted_positions,
                        Interval interval, std::size_t max_intervals) {
  if (max_intervals < 2) {
    throw std::invalid_argument("a split needs at least two intervals");
  }
  if (!(interval.hi > interval.lo)) {
    throw std::invalid_argument("split interval must have positive length");
  }
  if (sorted_positions.empty() ||
      sorted_positions.front() == sorted_positions.back()) {
    throw std::invalid_argument("a split needs two distinct positions");
  }
  if (sorted_positions.front() < interval.lo ||
      sorted_positions.back() > interval.hi) {
    throw std::invalid_argument("positions fall outside the split interval");
  }

  const Boundaries bounds = MakeBoundaries(sorted_positions, interval);
  const std::size_t m = bounds.last();
  const std::size_t extra = max_intervals - 1;

  // best[r][a]: largest sum of Segment() covering [boundary a, end] with at
  // most r intervals.
  std::vector<std::vector<double>> best(extra + 1,
                                        std::vector<double>(m + 1, -INFINITY));
  for (std::size_t a = 0; a < m; ++a) {
    if (bounds.usable[a]) best[1][a] = bounds.Segment(a, m);
  }
  for (std::size_t r = 2; r <= extra; ++r) {
    for (std::size_t a = 0; a < m; ++a) {
      if (!bounds.usable[a]) continue;
      double value = best[r - 1][a];
      for (std::size_t b = a + 1; b < m; ++b) {
        if (!bounds.usable[b]) continue;
        value = std::max(value, bounds.Segment(a, b) + best[r - 1][b]);
      }
      best[r][a] = value;
    }
  }

  // At least one breakpoint; the first interval starts at boundary 0.
  double optimum = -INFINITY;
  for (std::size_t b = 1; b < m; ++b) {
    if (!bounds.usable[b]) continue;
    optimum = std::max(optimum, bounds.Segment(0, b) + best[extra][b]);
  }
  if (!std::isfinite(optimum)) {
    throw std::invalid_argument("no breakpoint fits strictly inside interval");
  }

  // Leftmost reconstruction yields the lexicographically smallest optimum.
  SplitResult result;
  std::size_t current = 0;
  std::size_t remaining = extra;
  double target = optimum;
  while (true) {
    std::size_t chosen = m;
    for (std::size_t b = current + 1; b < m; ++b) {
      if (!bounds.usable[b]) continue;
      if (Reaches(bounds.Segment(current, b) + best[remaining][b], target)) {
        chosen = b;
        break;
      }
    }
    if (chosen == m) break;
    result.breakpoints.push_back(bounds.position[chosen]);
    target = best[remaining][chosen];
    current = chosen;
    if (remaining == 1 || Reaches(bounds.Segment(current, m), target)) break;
    --remaining;
  }
  result.score =
      SplitObjective(sorted_positions, interval, result.breakpoints);
  return result;
}

std::string AggregationName(Aggregation aggregation) {
  return aggregation == Aggregation::kMax ? "max" : "mean";
}

Aggregation ParseAggregation(const std::string& name) {
  if (name == "mean") return Aggregation::kMean;
  if (name == "max") return Aggregation::kMax;
  throw ConfigError("unknown aggregation '" + name + "' (use mean or max)");
}

void ForestConfig::Validate() const {
  if (num_trees < 1) throw ConfigError("forest needs at least one tree");
  if (partitions < 2) throw ConfigError("partitions must be at least 2");
  if (max_depth < 1) throw ConfigError("max_depth must be >= 1");
  if (subsample_size < 1) throw ConfigError("subsample size must be >= 1");
}

namespace {

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& sample, std::size_t partitions,
              std::size_t max_depth, std::vector<SparsityTree::Node>* nodes)
      : sample_(sample),
        partitions_(partitions),
        max_depth_(max_depth),
        nodes_(*nodes) {}

  std::size_t Grow(std::vector<std::size_t> members, Cube cube,
                   std::size_t depth) {
    const std::size_t id = nodes_.size();
    nodes_.emplace_back();
    nodes_[id].cube = std::move(cube);
    nodes_[id].depth = depth;
    nodes_[id].count = members.size();

    std::optional<SplitResult> split;
    if (depth < max_depth_ && members.size() > 1) {
      split = FindSplit(members, nodes_[id].cube);
    }
    if (!split) {
      nodes_[id].sparsity =
          CubeSparsity(nodes_[id].cube.Volume(), members.size());
      return id;
    }

    const std::size_t j = split->coordinate;
    const auto& cuts = split->breakpoints;
    std::vector<std::vector<std::size_t>> parts(cuts.size() + 1);
    for (const std::size_t i : members) {
      const double x = sample_(i, j);
      parts[std::upper_bound(cuts.begin(), cuts.end(), x) - cuts.begin()]
          .push_back(i);
    }
    const Interval range = nodes_[id].cube.interval(j);
    nodes_[id].coordinate = j;
    nodes_[id].breakpoints = cuts;

    std::vector<std::size_t> children;
    for (std::size_t c = 0; c < parts.size(); ++c) {
      Cube child_cube = nodes_[id].cube;
      child_cube.Restrict(j, {c == 0 ? range.lo : cuts[c - 1],
                              c == cuts.size() ? range.hi : cuts[c]});
      children.push_back(
          Grow(std::move(parts[c]), std::move(child_cube), depth + 1));
    }
    nodes_[id].children = std::move(children);
    return id;
  }

 private:
  std::optional<SplitResult> FindSplit(const std::vector<std::size_t>& members,
                                       const Cube& cube) {
    std::optional<SplitResult> best;
    std::vector<double> values(members.size());
    for (std::size_t j = 0; j < sample_.cols(); ++j) {
      for (std::size_t k = 0; k < members.size(); ++k) {
        values[k] = sample_(members[k], j);
      }
      std::sort(values.begin(), values.end());
      if (values.front() == values.back()) continue;
      const Interval range = cube.interval(j);
      SplitResult candidate;
      try {
        candidate = BestSplit1D(values, range, partitions_);
      } catch (const std::invalid_argument&) {
        continue;
      }
      candidate.coordinate = j;
      if (!best || candidate.score > best->score +
                                         kTieTolerance *
                                             std::max(1.0, std::abs(best->score))) {
        best = std::move(candidate);
      }
    }
    return best;
  }

  const Matrix& sample_;
  const std::size_t partitions_;
  const std::size_t max_depth_;
  std::vector<SparsityTree::Node>& nodes_;
};

nlohmann::json CubeToJson(const Cube& cube) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& [coordinate, interval] : cube.tracked()) {
    out.push_back({coordinate, interval.lo, interval.hi});
  }
  return out;
}

Cube CubeFromJson(const nlohmann::json& doc) {
  Cube cube;
  for (const auto& entry : doc) {
    cube.Restrict(entry.at(0).get<std::size_t>(),
                  {entry.at(1).get<double>(), entry.at(2).get<double>()});
  }
  return cube;
}

}  // namespace

SparsityTree SparsityTree::Build(const Matrix& sample, std::size_t partitions,
                                 std::size_t max_depth) {
  if (sample.rows() == 0) {
    throw std::invalid_argument("cannot build a tree on an empty sample");
  }
  SparsityTree tree;
  std::vector<std::size_t> members(sample.rows());
  std::iota(members.begin(), members.end(), 0);
  TreeBuilder(sample, partitions, max_depth, &tree.nodes_)
      .Grow(std::move(members), Cube(), 0);
  return tree;
}

std::size_t SparsityTree::FindLeaf(std::span<const double> x) const {
  std::size_t id = 0;
  while (!nodes_[id].is_leaf()) {
    const Node& node = nodes_[id];
    const auto& cuts = node.breakpoints;
    const auto child = static_cast<std::size_t>(
        std::upper_bound(cuts.begin(), cuts.end(), x[node.coordinate]) -
        cuts.begin());
    id = node.children[child];
  }
  return id;
}

std::size_t SparsityTree::Depth() const {
  std::size_t depth = 0;
  for (const Node& node : nodes_) depth = std::max(depth, node.depth);
  return depth;
}

std::size_t SparsityTree::NumLeaves() const {
  return static_cast<std::size_t>(std::count_if(
      nodes_.begin(), nodes_.end(), [](const Node& n) { return n.is_leaf(); }));
}

nlohmann::json SparsityTree::ToJson() const {
  nlohmann::json nodes = nlohmann::json::array();
  for (const Node& node : nodes_) {
    nlohmann::json entry = {{"depth", node.depth},
                            {"count", node.count},
                            {"cube", CubeToJson(node.cube)}};
    if (node.is_leaf()) {
      entry["volume"] = node.cube.Volume();
      entry["sparsity"] = node.sparsity;
    } else {
      entry["coordinate"] = node.coordinate;
      entry["breakpoints"] = node.breakpoints;
      entry["children"] = node.children;
    }
    nodes.push_back(std::move(entry));
  }
  return {{"nodes", std::move(nodes)}};
}

SparsityTree SparsityTree::FromJson(const nlohmann::json& doc) {
  SparsityTree tree;
  for (const auto& entry : doc.at("nodes")) {
    Node node;
    node.depth = entry.at("depth").get<std::size_t>();
    node.count = entry.at("count").get<std::size_t>();
    node.cube = CubeFromJson(entry.at("cube"));
    if (entry.contains("children")) {
      node.coordinate = entry.at("coordinate").get<std::size_t>();
      node.breakpoints = entry.at("breakpoints").get<std::vector<double>>();
      node.children = entry.at("children").get<std::vector<std::size_t>>();
      if (node.children.size() != node.breakpoints.size() + 1) {
        throw DataError("tree node has inconsistent breakpoints/children");
      }
    } else {
      node.sparsity = entry.at("sparsity").get<double>();
    }
    tree.nodes_.push_back(std::move(node));
  }
  if (tree.nodes_.empty()) throw DataError("tree has no nodes");
  for (const Node& node : tree.nodes_) {
    for (const std::size_t child : node.children) {
      if (child >= tree.nodes_.size()) {
        throw DataError("tree child index out of range");
      }
    }
  }
  return tree;
}

SparsityForest::SparsityForest(ForestConfig config, std::uint64_t seed,
                               std::size_t dims,
                               std::vector<SparsityTree> trees)
    : config_(config), seed_(seed), dims_(dims), trees_(std::move(trees)) {
  if (trees_.empty()) throw ConfigError("forest needs at least one tree");
}

SparsityForest SparsityForest::Fit(const Matrix& normalized,
                                   const ForestConfig& config,
                                   std::uint64_t seed) {
  config.Validate();
  if (normalized.rows() == 0) {
    throw DataError("cannot fit a forest on zero samples");
  }
  const std::size_t n = normalized.rows();
  const std::size_t sample_size = std::min(n, config.subsample_size);

  std::vector<SparsityTree> trees(config.num_trees);
  ParallelFor(0, config.num_trees, [&](std::size_t t) {
    Rng rng(DeriveSeed(seed, t));
    // Partial Fisher-Yates: the first sample_size entries are uniform
    // without replacement.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = 0; i < sample_size; ++i) {
      std::swap(order[i], order[i + UniformIndex(rng, n - i)]);
    }
    order.resize(sample_size);
    std::sort(order.begin(), order.end());
    trees[t] = SparsityTree::Build(normalized.Rows(order), config.partitions,
                                   config.max_depth);
  });
  return SparsityForest(config, seed, normalized.cols(), std::move(trees));
}

double SparsityForest::Score(std::span<const double> x) const {
  if (x.size() != dims_) {
    throw DataError("forest expects " + std::to_string(dims_) +
                    " features, got " + std::to_string(x.size()));
  }
  if (config_.aggregation == Aggregation::kMax) {
    double worst = 0.0;
    for (const auto& tree : trees_) worst = std::max(worst, tree.Sparsity(x));
    return worst;
  }
  double total = 0.0;
  for (const auto& tree : trees_) total += tree.Sparsity(x);
  return total / static_cast<double>(trees_.size());
}

std::vector<double> SparsityForest::ScoreRows(
    const Matrix& normalized, std::span<const std::size_t> rows) const {
  std::vector<double> scores(rows.size());
  ParallelFor(0, rows.size(), [&](std::size_t k) {
    scores[k] = Score(normalized.row(rows[k]));
  });
  return scores;
}

nlohmann::json SparsityForest::ToJson() const {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& tree : trees_) trees.push_back(tree.ToJson());
  return {{"version", kFormatVersion},
          {"seed", seed_},
          {"dims", dims_},
          {"config",
           {{"num_trees", config_.num_trees},
            {"partitions", config_.partitions},
            {"max_depth", config_.max_depth},
            {"subsample_size", config_.subsample_size},
            {"aggregation", AggregationName(config_.aggregation)}}},
          {"trees", std::move(trees)}};
}

SparsityForest SparsityForest::FromJson(const nlohmann::json& doc) {
  if (doc.at("version").get<int>() != kFormatVersion) {
    throw DataError("unsupported forest format version");
  }
  ForestConfig config;
  const auto& c = doc.at("config");
  config.num_trees = c.at("num_trees").get<std::size_t>();
  config.partitions = c.at("partitions").get<std::size_t>();
  config.max_depth = c.at("max_depth").get<std::size_t>();
  config.subsample_size = c.at("subsample_size").get<std::size_t>();
  config.aggregation = ParseAggregation(c.at("aggregation").get<std::string>());
  std::vector<SparsityTree> trees;
  for (const auto& t : doc.at("trees")) trees.push_back(SparsityTree::FromJson(t));
  return SparsityForest(config, doc.at("seed").get<std::uint64_t>(),
                        doc.at("dims").get<std::size_t>(), std::move(trees));
}

}  // namespace gald
