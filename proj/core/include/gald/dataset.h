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

#ifndef GALD_DATASET_H_
#define GALD_DATASET_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gald {

using IndexSet = std::vector<std::size_t>;

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double operator()(std::size_t r, std::size_t c) const {
    return values_[r * cols_ + c];
  }
  double& operator()(std::size_t r, std::size_t c) {
    return values_[r * cols_ + c];
  }

  std::span<const double> row(std::size_t r) const {
    return {values_.data() + r * cols_, cols_};
  }
  std::span<double> row(std::size_t r) {
    return {values_.data() + r * cols_, cols_};
  }

  // Copies of the given rows, in order.
  Matrix Rows(std::span<const std::size_t> indices) const;

  const std::vector<double>& values() const { return values_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

// Feature matrix with optional ground truth (1 = anomaly).
struct Dataset {
  std::string name;
  std::vector<std::string> feature_names;
  Matrix features;
  std::optional<std::vector<int>> labels;
  // Name of the label column when the dataset was read from CSV.
  std::string label_name = "label";

  std::size_t size() const { return features.rows(); }
  std::size_t dims() const { return features.cols(); }
  bool has_labels() const { return labels.has_value(); }

  // Throws DataError when an invariant is violated: empty matrix, non-finite
  // values, labels outside {0,1} or of the wrong length.
  void Validate() const;
};

// Observed normals, unlabeled training samples and held-out test samples.
// The three sets are sorted and partition [0, N).
struct ScenarioSplit {
  IndexSet observed_normals;
  IndexSet unlabeled;
  IndexSet test;
  std::uint64_t seed = 0;

  // Observed normals followed by unlabeled samples, sorted.
  IndexSet TrainingPool() const;
};

// Per-coordinate min-max scaling to [0,1], fit on a subset of rows.
class Normalizer {
 public:
  Normalizer() = default;
  Normalizer(std::vector<double> min, std::vector<double> max);

  std::size_t dims() const { return min_.size(); }
  const std::vector<double>& min() const { return min_; }
  const std::vector<double>& max() const { return max_; }

  // Maps into [0,1]; values outside the fitted range are clamped and constant
  // coordinates map to 0.5.
  double Apply(std::size_t coordinate, double value) const;
  void ApplyRow(std::span<const double> in, std::span<double> out) const;
  Matrix Transform(const Matrix& features) const;

  bool operator==(const Normalizer&) const = default;

 private:
  std::vector<double> min_;
  std::vector<double> max_;
};

// Reads a comma separated file with a header row. When label_column is set,
// that column becomes the labels and must hold 0 or 1; every other column must
// parse as a finite real number.
Dataset LoadCsv(const std::string& path,
                const std::optional<std::string>& label_column = std::nullopt);

// Writes features (and labels, when present, as the last column) using the
// shortest decimal representation that reads back to the same double.
void WriteCsv(const Dataset& data, const std::string& path);

// The given rows, in the given order, with their labels.
Dataset SelectRows(const Dataset& data, std::span<const std::size_t> rows);

Normalizer FitNormalizer(const Dataset& data,
                         std::span<const std::size_t> fit_indices);

// Samples round(train_frac * N) rows as the training pool. Of its true
// normals, round(observed_normal_frac * count) (at least one) become observed
// normals; the rest of the pool is unlabeled, everything else is test.
ScenarioSplit SplitScenario(const Dataset& data, std::uint64_t seed,
                            double train_frac, double observed_normal_frac);

// Checks the partition invariants of a split against a dataset.
void ValidateSplit(const Dataset& data, const ScenarioSplit& split);

struct SyntheticOptions {
  std::size_t clusters = 3;
  double cluster_stddev = 0.03;
  // Minimum distance between any anomaly and every cluster center.
  double margin = 0.25;
  std::size_t max_retries = 10000;
};

struct SyntheticDataset {
  Dataset dataset;
  std::vector<std::vector<double>> centers;
};

// Normals from compact Gaussian clusters inside [0,1]^d (rows first), then
// anomalies uniform on [0,1]^d at least `margin` away from every center.
SyntheticDataset GenerateSynthetic(std::size_t n_normal, std::size_t n_anomaly,
                                   std::size_t dims, std::uint64_t seed,
                                   const SyntheticOptions& options = {});

}  // namespace gald

#endif  // GALD_DATASET_H_
