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

#include "gald/detector.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gald/errors.h"
#include "gald/parallel.h"
#include "gald/random.h"

namespace gald {
namespace {

constexpr std::size_t kNoNode = std::numeric_limits<std::size_t>::max();
// Splits must improve the regularized objective by more than this.
constexpr double kMinGain = 1e-12;

double Sigmoid(double margin) {
  if (margin >= 0) return 1.0 / (1.0 + std::exp(-margin));
  const double e = std::exp(margin);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double Softplus(double z) {
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double LeafValue(double g, double h, double lambda) {
  const double denom = h + lambda;
  return denom > 0.0 ? -g / denom : 0.0;
}

double Score(double g, double h, double lambda) {
  const double denom = h + lambda;
  return denom > 0.0 ? g * g / denom : 0.0;
}

struct Candidate {
  double gain = kMinGain;
  std::size_t feature = 0;
  double threshold = 0.0;
  bool valid = false;
};

// Greedy level-wise growth over presorted feature columns.
class TreeGrower {
 public:
  TreeGrower(const Matrix& features,
             const std::vector<std::vector<std::uint32_t>>& sorted,
             const DetectorParams& params)
      : features_(features), sorted_(sorted), params_(params) {}

  RegressionTree Grow(const std::vector<double>& grad,
                      const std::vector<double>& hess,
                      const std::vector<char>& in_sample) {
    const std::size_t n = features_.rows();
    nodes_.assign(1, RegressionTree::Node{});
    sum_g_.assign(1, 0.0);
    sum_h_.assign(1, 0.0);
    position_.assign(n, kNoNode);
    for (std::size_t i = 0; i < n; ++i) {
      if (!in_sample[i]) continue;
      position_[i] = 0;
      sum_g_[0] += grad[i];
      sum_h_[0] += hess[i];
    }

    std::vector<std::size_t> frontier = {0};
    for (std::size_t depth = 0; depth < params_.max_depth && !frontier.empty();
         ++depth) {
      const std::vector<Candidate> best = FindSplits(frontier, grad, hess);
      std::vector<std::size_t> next;
      std::vector<std::size_t> slot_of(nodes_.size(), kNoNode);
      for (std::size_t s = 0; s < frontier.size(); ++s) {
        if (!best[s].valid) continue;
        const std::size_t id = frontier[s];
        const std::size_t left = nodes_.size();
        nodes_.push_back({});
        nodes_.push_back({});
        sum_g_.resize(nodes_.size(), 0.0);
        sum_h_.resize(nodes_.size(), 0.0);
        nodes_[id].feature = best[s].feature;
        nodes_[id].threshold = best[s].threshold;
        nodes_[id].left = left;
        nodes_[id].right = left + 1;
        slot_of[id] = id;
        next.push_back(left);
        next.push_back(left + 1);
      }
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t id = position_[i];
        if (id == kNoNode || id >= slot_of.size() || slot_of[id] == kNoNode) {
          continue;
        }
        const auto& node = nodes_[id];
        const std::size_t child =
            features_(i, node.feature) < node.threshold ? node.left : node.right;
        position_[i] = child;
        sum_g_[child] += grad[i];
        sum_h_[child] += hess[i];
      }
      frontier = std::move(next);
    }

    for (std::size_t id = 0; id < nodes_.size(); ++id) {
      if (nodes_[id].is_leaf()) {
        nodes_[id].value = LeafValue(sum_g_[id], sum_h_[id], params_.lambda);
      }
    }
    return RegressionTree(std::move(nodes_));
  }

 private:
  std::vector<Candidate> FindSplits(const std::vector<std::size_t>& frontier,
                                    const std::vector<double>& grad,
                                    const std::vector<double>& hess) const {
    const std::size_t slots = frontier.size();
    std::vector<std::size_t> slot_of(nodes_.size(), kNoNode);
    for (std::size_t s = 0; s < slots; ++s) slot_of[frontier[s]] = s;

    std::vector<Candidate> best(slots);
    std::vector<double> left_g(slots), left_h(slots), last(slots);
    std::vector<char> seen(slots);
    const double lambda = params_.lambda;
    for (std::size_t j = 0; j < features_.cols(); ++j) {
      std::fill(left_g.begin(), left_g.end(), 0.0);
      std::fill(left_h.begin(), left_h.end(), 0.0);
      std::fill(seen.begin(), seen.end(), 0);
      for (const std::uint32_t i : sorted_[j]) {
        const std::size_t id = position_[i];
        if (id == kNoNode) continue;
        const std::size_t s = slot_of[id];
        if (s == kNoNode) continue;
        const double v = features_(i, j);
        if (seen[s] && v != last[s]) {
          const double gl = left_g[s];
          const double hl = left_h[s];
          const double gr = sum_g_[id] - gl;
          const double hr = sum_h_[id] - hl;
          if (hl >= params_.min_child_weight && hr >= params_.min_child_weight) {
            const double gain =
                0.5 * (Score(gl, hl, lambda) + Score(gr, hr, lambda) -
                       Score(sum_g_[id], sum_h_[id], lambda)) -
                params_.gamma;
            if (gain > best[s].gain) {
              double cut = last[s] + (v - last[s]) / 2;
              if (!(cut > last[s])) cut = v;
              best[s] = {gain, j, cut, true};
            }
          }
        }
        left_g[s] += grad[i];
        left_h[s] += hess[i];
        last[s] = v;
        seen[s] = 1;
      }
    }
    return best;
  }

  const Matrix& features_;
  const std::vector<std::vector<std::uint32_t>>& sorted_;
  const DetectorParams& params_;
  std::vector<RegressionTree::Node> nodes_;
  std::vector<double> sum_g_;
  std::vector<double> sum_h_;
  std::vector<std::size_t> position_;
};

}  // namespace

void DetectorParams::Validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be non-negative");
  if (max_depth < 1) throw ConfigError("detector depth must be >= 1");
  if (!(gamma >= 0.0)) throw ConfigError("gamma must be non-negative");
  if (!(min_child_weight >= 0.0)) {
    throw ConfigError("min_child_weight must be non-negative");
  }
  if (!(subsample > 0.0 && subsample <= 1.0)) {
    throw ConfigError("subsample must lie in (0,1]");
  }
}

double RegressionTree::Predict(std::span<const double> x) const {
  return nodes_[FindLeaf(x)].value;
}

std::size_t RegressionTree::FindLeaf(std::span<const double> x) const {
  std::size_t id = 0;
  while (!nodes_[id].is_leaf()) {
    const Node& node = nodes_[id];
    id = x[node.feature] < node.threshold ? node.left : node.right;
  }
  return id;
}

nlohmann::json RegressionTree::NodeToJson(std::size_t id) const {
  const Node& node = nodes_[id];
  if (node.is_leaf()) return {{"leaf", node.value}};
  return {{"feature", node.feature},
          {"threshold", node.threshold},
          {"left", NodeToJson(node.left)},
          {"right", NodeToJson(node.right)}};
}

nlohmann::json RegressionTree::ToJson() const { return NodeToJson(0); }

RegressionTree RegressionTree::FromJson(const nlohmann::json& doc) {
  std::vector<Node> nodes;
  // Children are numbered in the same breadth-first order the grower uses, so
  // a reloaded tree compares equal to the original.
  std::vector<const nlohmann::json*> queue = {&doc};
  nodes.emplace_back();
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const nlohmann::json& entry = *queue[head];
    if (entry.contains("leaf")) {
      nodes[head].value = entry.at("leaf").get<double>();
      continue;
    }
    nodes[head].feature = entry.at("feature").get<std::size_t>();
    nodes[head].threshold = entry.at("threshold").get<double>();
    nodes[head].left = queue.size();
    nodes[head].right = queue.size() + 1;
    queue.push_back(&entry.at("left"));
    queue.push_back(&entry.at("right"));
    nodes.resize(queue.size());
  }
  return RegressionTree(std::move(nodes));
}

Detector::Detector(DetectorParams params, std::size_t dims, double base_score,
                   std::vector<RegressionTree> trees)
    : params_(params),
      dims_(dims),
      base_score_(base_score),
      trees_(std::move(trees)) {}

double Detector::Margin(std::span<const double> x) const {
  if (x.size() != dims_) {
    throw DataError("detector expects " + std::to_string(dims_) +
                    " features, got " + std::to_string(x.size()));
  }
  double sum = 0.0;
  for (const auto& tree : trees_) sum += tree.Predict(x);
  return base_score_ + params_.learning_rate * sum;
}

double Detector::PredictScore(std::span<const double> x) const {
  return Sigmoid(Margin(x));
}

std::vector<double> Detector::PredictRows(
    const Matrix& features, std::span<const std::size_t> rows) const {
  std::vector<double> scores(rows.size());
  ParallelFor(0, rows.size(), [&](std::size_t k) {
    scores[k] = PredictScore(features.row(rows[k]));
  });
  return scores;
}

int Detector::Classify(std::span<const double> x, double threshold) const {
  return PredictScore(x) >= threshold ? 1 : 0;
}

double WeightedLogLoss(std::span<const double> margins,
                       std::span<const int> labels,
                       std::span<const double> weights) {
  double total = 0.0;
  for (std::size_t i = 0; i < margins.size(); ++i) {
    const double loss =
        labels[i] == 1 ? Softplus(-margins[i]) : Softplus(margins[i]);
    total += weights[i] * loss;
  }
  return total;
}

Detector TrainDetector(const Matrix& features, std::span<const int> labels,
                       std::span<const double> weights,
                       const DetectorParams& params, std::uint64_t seed) {
  params.Validate();
  const std::size_t n = features.rows();
  if (labels.size() != n || weights.size() != n) {
    throw ConfigError("features, labels and weights differ in length");
  }
  double weight_pos = 0.0;
  double weight_all = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] != 0 && labels[i] != 1) {
      throw ConfigError("detector labels must be 0 or 1");
    }
    if (!(weights[i] >= 0.0) || !std::isfinite(weights[i])) {
      throw ConfigError("detector weights must be finite and non-negative");
    }
    weight_all += weights[i];
    if (labels[i] == 1) weight_pos += weights[i];
  }
  if (!(weight_pos > 0.0) || !(weight_all - weight_pos > 0.0)) {
    throw PipelineError("detector",
                        "training set needs positive weight on both classes");
  }
  const double prior = weight_pos / weight_all;
  const double base = std::log(prior / (1.0 - prior));

  std::vector<std::vector<std::uint32_t>> sorted(features.cols());
  for (std::size_t j = 0; j < features.cols(); ++j) {
    auto& order = sorted[j];
    order.resize(n);
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::uint32_t a, std::uint32_t b) {
                       return features(a, j) < features(b, j);
                     });
  }

  Detector detector(params, features.cols(), base, {});
  std::vector<double> margin(n, base);
  std::vector<double> grad(n), hess(n);
  std::vector<char> in_sample(n, 1);
  detector.loss_trace_.push_back(WeightedLogLoss(margin, labels, weights));

  Rng rng(seed);
  TreeGrower grower(features, sorted, params);
  for (std::size_t round = 0; round < params.rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = Sigmoid(margin[i]);
      grad[i] = weights[i] * (p - labels[i]);
      hess[i] = weights[i] * p * (1.0 - p);
    }
    if (params.subsample < 1.0) {
      for (std::size_t i = 0; i < n; ++i) {
        in_sample[i] = UniformUnit(rng) < params.subsample;
      }
    }
    RegressionTree tree = grower.Grow(grad, hess, in_sample);
    for (std::size_t i = 0; i < n; ++i) {
      margin[i] += params.learning_rate * tree.Predict(features.row(i));
    }
    detector.trees_.push_back(std::move(tree));
    detector.loss_trace_.push_back(WeightedLogLoss(margin, labels, weights));
  }
  return detector;
}

Detector TrainDetector(const Matrix& features, std::span<const int> labels,
                       const DetectorParams& params, std::uint64_t seed) {
  const std::vector<double> ones(features.rows(), 1.0);
  return TrainDetector(features, labels, ones, params, seed);
}

Detector TrainDetector(const Matrix& normalized,
                       const WeightedTrainingSet& training,
                       const DetectorParams& params, std::uint64_t seed) {
  std::vector<std::size_t> rows;
  std::vector<int> labels;
  std::vector<double> weights;
  for (const auto& s : training.samples) {
    rows.push_back(s.index);
    labels.push_back(s.label);
    weights.push_back(s.weight);
  }
  return TrainDetector(normalized.Rows(rows), labels, weights, params, seed);
}

nlohmann::json Detector::ToJson() const {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& tree : trees_) trees.push_back(tree.ToJson());
  return {{"dims", dims_},
          {"base_score", base_score_},
          {"params",
           {{"rounds", params_.rounds},
            {"learning_rate", params_.learning_rate},
            {"max_depth", params_.max_depth},
            {"lambda", params_.lambda},
            {"gamma", params_.gamma},
            {"min_child_weight", params_.min_child_weight},
            {"subsample", params_.subsample}}},
          {"trees", std::move(trees)}};
}

Detector Detector::FromJson(const nlohmann::json& doc) {
  DetectorParams params;
  const auto& p = doc.at("params");
  params.rounds = p.at("rounds").get<std::size_t>();
  params.learning_rate = p.at("learning_rate").get<double>();
  params.max_depth = p.at("max_depth").get<std::size_t>();
  params.lambda = p.at("lambda").get<double>();
  params.gamma = p.at("gamma").get<double>();
  params.min_child_weight = p.at("min_child_weight").get<double>();
  params.subsample = p.at("subsample").get<double>();
  std::vector<RegressionTree> trees;
  for (const auto& t : doc.at("trees")) trees.push_back(RegressionTree::FromJson(t));
  return Detector(params, doc.at("dims").get<std::size_t>(),
                  doc.at("base_score").get<double>(), std::move(trees));
}

}  // namespace gald
