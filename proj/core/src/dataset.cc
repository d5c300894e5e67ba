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

#include "gald/dataset.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>

#include "gald/errors.h"
#include "gald/io.h"
#include "gald/random.h"

namespace gald {
namespace {

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> SplitLine(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(Trim(line.substr(start)));
      break;
    }
    cells.push_back(Trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return cells;
}

bool ParseDouble(std::string_view cell, double* out) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  const auto [ptr, ec] =
      std::from_chars(cell.data(), cell.data() + cell.size(), *out);
  return ec == std::errc() && ptr == cell.data() + cell.size();
}

std::size_t RoundCount(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
}

}  // namespace

Matrix Matrix::Rows(std::span<const std::size_t> indices) const {
  Matrix out(indices.size(), cols_);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto src = row(indices[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

void Dataset::Validate() const {
  if (features.rows() == 0 || features.cols() == 0) {
    throw DataError("dataset '" + name + "' is empty");
  }
  for (std::size_t r = 0; r < features.rows(); ++r) {
    for (std::size_t c = 0; c < features.cols(); ++c) {
      if (!std::isfinite(features(r, c))) {
        throw DataError("non-finite value at row " + std::to_string(r) +
                        ", column " + std::to_string(c));
      }
    }
  }
  if (labels) {
    if (labels->size() != features.rows()) {
      throw DataError("label count does not match row count");
    }
    for (std::size_t r = 0; r < labels->size(); ++r) {
      if ((*labels)[r] != 0 && (*labels)[r] != 1) {
        throw DataError("label outside {0,1} at row " + std::to_string(r));
      }
    }
  }
}

IndexSet ScenarioSplit::TrainingPool() const {
  IndexSet pool;
  pool.reserve(observed_normals.size() + unlabeled.size());
  std::merge(observed_normals.begin(), observed_normals.end(),
             unlabeled.begin(), unlabeled.end(), std::back_inserter(pool));
  return pool;
}

Normalizer::Normalizer(std::vector<double> min, std::vector<double> max)
    : min_(std::move(min)), max_(std::move(max)) {
  if (min_.size() != max_.size()) {
    throw DataError("normalizer min/max dimension mismatch");
  }
  for (std::size_t j = 0; j < min_.size(); ++j) {
    if (!(min_[j] <= max_[j])) {
      throw DataError("normalizer min exceeds max on coordinate " +
                      std::to_string(j));
    }
  }
}

double Normalizer::Apply(std::size_t coordinate, double value) const {
  const double lo = min_[coordinate];
  const double hi = max_[coordinate];
  if (!(hi > lo)) return 0.5;
  const double scaled = (value - lo) / (hi - lo);
  return std::clamp(scaled, 0.0, 1.0);
}

void Normalizer::ApplyRow(std::span<const double> in,
                          std::span<double> out) const {
  if (in.size() != dims() || out.size() != dims()) {
    throw DataError("expected " + std::to_string(dims()) + " features, got " +
                    std::to_string(in.size()));
  }
  for (std::size_t j = 0; j < in.size(); ++j) out[j] = Apply(j, in[j]);
}

Matrix Normalizer::Transform(const Matrix& features) const {
  Matrix out(features.rows(), features.cols());
  for (std::size_t r = 0; r < features.rows(); ++r) {
    ApplyRow(features.row(r), out.row(r));
  }
  return out;
}

Dataset LoadCsv(const std::string& path,
                const std::optional<std::string>& label_column) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open data file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw DataError("empty data file: " + path);
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
      static_cast<unsigned char>(line[1]) == 0xBB &&
      static_cast<unsigned char>(line[2]) == 0xBF) {
    line.erase(0, 3);
  }
  std::vector<std::string> header;
  for (const auto cell : SplitLine(line)) header.emplace_back(cell);

  std::optional<std::size_t> label_index;
  if (label_column) {
    const auto it = std::find(header.begin(), header.end(), *label_column);
    if (it == header.end()) {
      throw DataError("label column '" + *label_column + "' not found in " +
                      path);
    }
    label_index = static_cast<std::size_t>(it - header.begin());
  }

  Dataset data;
  {
    const std::string filename = path.substr(path.find_last_of('/') + 1);
    data.name = filename.substr(0, filename.rfind('.'));
  }
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (label_index && c == *label_index) {
      data.label_name = std::string(header[c]);
    } else {
      data.feature_names.emplace_back(header[c]);
    }
  }
  const std::size_t d = data.feature_names.size();
  if (d == 0) throw DataError("no feature columns in " + path);

  std::vector<double> values;
  std::vector<int> labels;
  std::size_t row = 0;
  std::size_t line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (Trim(line).empty()) continue;
    const auto cells = SplitLine(line);
    if (cells.size() != header.size()) {
      throw DataError(path + ": line " + std::to_string(line_number) +
                      " has " + std::to_string(cells.size()) +
                      " columns, expected " + std::to_string(header.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double value;
      if (!ParseDouble(cells[c], &value) || !std::isfinite(value)) {
        throw DataError(path + ": cannot parse '" + std::string(cells[c]) +
                        "' at row " + std::to_string(row) + ", column '" +
                        std::string(header[c]) + "'");
      }
      if (label_index && c == *label_index) {
        if (value != 0.0 && value != 1.0) {
          throw DataError(path + ": label '" + std::string(cells[c]) +
                          "' at row " + std::to_string(row) +
                          " is not 0 or 1");
        }
        labels.push_back(static_cast<int>(value));
      } else {
        values.push_back(value);
      }
    }
    ++row;
  }
  if (row == 0) throw DataError("no data rows in " + path);

  data.features = Matrix(row, d);
  std::copy(values.begin(), values.end(), data.features.row(0).data());
  if (label_index) data.labels = std::move(labels);
  data.Validate();
  return data;
}

void WriteCsv(const Dataset& data, const std::string& path) {
  std::ostringstream out;
  for (std::size_t c = 0; c < data.dims(); ++c) {
    if (c > 0) out << ',';
    out << (c < data.feature_names.size() ? data.feature_names[c]
                                          : "f" + std::to_string(c + 1));
  }
  if (data.labels) out << ',' << data.label_name;
  out << '\n';
  for (std::size_t r = 0; r < data.size(); ++r) {
    for (std::size_t c = 0; c < data.dims(); ++c) {
      if (c > 0) out << ',';
      out << FormatDouble(data.features(r, c));
    }
    if (data.labels) out << ',' << (*data.labels)[r];
    out << '\n';
  }
  WriteFileAtomic(path, out.str());
}

Dataset SelectRows(const Dataset& data, std::span<const std::size_t> rows) {
  Dataset out;
  out.name = data.name;
  out.feature_names = data.feature_names;
  out.label_name = data.label_name;
  out.features = data.features.Rows(rows);
  if (data.labels) {
    std::vector<int> labels;
    labels.reserve(rows.size());
    for (const std::size_t i : rows) labels.push_back((*data.labels)[i]);
    out.labels = std::move(labels);
  }
  return out;
}

Normalizer FitNormalizer(const Dataset& data,
                         std::span<const std::size_t> fit_indices) {
  if (fit_indices.empty()) {
    throw DataError("cannot fit normalizer on an empty index set");
  }
  const std::size_t d = data.dims();
  std::vector<double> lo(d, INFINITY);
  std::vector<double> hi(d, -INFINITY);
  for (const std::size_t i : fit_indices) {
    const auto row = data.features.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      lo[j] = std::min(lo[j], row[j]);
      hi[j] = std::max(hi[j], row[j]);
    }
  }
  return Normalizer(std::move(lo), std::move(hi));
}

ScenarioSplit SplitScenario(const Dataset& data, std::uint64_t seed,
                            double train_frac, double observed_normal_frac) {
  if (!data.labels) {
    throw DataError("scenario split needs ground-truth labels");
  }
  if (!(train_frac > 0.0 && train_frac < 1.0)) {
    throw ConfigError("train_frac must lie in (0,1)");
  }
  if (!(observed_normal_frac > 0.0 && observed_normal_frac <= 1.0)) {
    throw ConfigError("observed_normal_frac must lie in (0,1]");
  }
  const std::size_t n = data.size();
  Rng rng(seed);

  IndexSet order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Shuffle(order, rng);
  const std::size_t n_train = std::clamp<std::size_t>(
      RoundCount(train_frac, n), 1, n);

  IndexSet train_normals;
  IndexSet train_anomalies;
  ScenarioSplit split;
  split.seed = seed;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = order[k];
    if (k >= n_train) {
      split.test.push_back(i);
    } else if ((*data.labels)[i] == 0) {
      train_normals.push_back(i);
    } else {
      train_anomalies.push_back(i);
    }
  }
  if (train_normals.empty()) {
    throw DataError("training pool contains no normal samples");
  }

  Shuffle(train_normals, rng);
  const std::size_t n_observed = std::clamp<std::size_t>(
      RoundCount(observed_normal_frac, train_normals.size()), 1,
      train_normals.size());
  split.observed_normals.assign(train_normals.begin(),
                                train_normals.begin() + n_observed);
  split.unlabeled.assign(train_normals.begin() + n_observed,
                         train_normals.end());
  split.unlabeled.insert(split.unlabeled.end(), train_anomalies.begin(),
                         train_anomalies.end());

  std::sort(split.observed_normals.begin(), split.observed_normals.end());
  std::sort(split.unlabeled.begin(), split.unlabeled.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

void ValidateSplit(const Dataset& data, const ScenarioSplit& split) {
  std::vector<int> seen(data.size(), 0);
  for (const IndexSet* set :
       {&split.observed_normals, &split.unlabeled, &split.test}) {
    for (const std::size_t i : *set) {
      if (i >= data.size()) {
        throw DataError("split index " + std::to_string(i) + " out of range");
      }
      if (seen[i]++ > 0) {
        throw DataError("split index " + std::to_string(i) +
                        " appears in more than one set");
      }
    }
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    throw DataError("split does not cover every sample");
  }
  if (split.observed_normals.empty()) {
    throw DataError("split has no observed normals");
  }
  if (data.labels) {
    for (const std::size_t i : split.observed_normals) {
      if ((*data.labels)[i] != 0) {
        throw DataError("observed normal " + std::to_string(i) +
                        " is labeled as an anomaly");
      }
    }
  }
}

SyntheticDataset GenerateSynthetic(std::size_t n_normal, std::size_t n_anomaly,
                                   std::size_t dims, std::uint64_t seed,
                                   const SyntheticOptions& options) {
  if (n_normal < 1 || dims < 1 || options.clusters < 1) {
    throw ConfigError("synthetic data needs n_normal >= 1, d >= 1 and at "
                      "least one cluster");
  }
  Rng rng(seed);
  SyntheticDataset out;
  out.centers.resize(options.clusters, std::vector<double>(dims));
  for (auto& center : out.centers) {
    for (double& v : center) v = 0.2 + 0.6 * UniformUnit(rng);
  }

  Dataset& data = out.dataset;
  data.name = "synthetic";
  for (std::size_t j = 0; j < dims; ++j) {
    data.feature_names.push_back("f" + std::to_string(j + 1));
  }
  data.features = Matrix(n_normal + n_anomaly, dims);
  data.labels = std::vector<int>(n_normal + n_anomaly, 0);

  for (std::size_t i = 0; i < n_normal; ++i) {
    const auto& center = out.centers[i % options.clusters];
    for (std::size_t j = 0; j < dims; ++j) {
      const double v = center[j] + options.cluster_stddev * StandardNormal(rng);
      data.features(i, j) = std::clamp(v, 0.0, 1.0);
    }
  }

  std::vector<double> candidate(dims);
  for (std::size_t a = 0; a < n_anomaly; ++a) {
    bool placed = false;
    for (std::size_t attempt = 0; attempt < options.max_retries; ++attempt) {
      for (double& v : candidate) v = UniformUnit(rng);
      bool far = true;
      for (const auto& center : out.centers) {
        double sq = 0.0;
        for (std::size_t j = 0; j < dims; ++j) {
          sq += (candidate[j] - center[j]) * (candidate[j] - center[j]);
        }
        if (std::sqrt(sq) < options.margin) {
          far = false;
          break;
        }
      }
      if (far) {
        placed = true;
        break;
      }
    }
    if (!placed) {
      throw DataError("cannot place anomaly " + std::to_string(a) +
                      " at margin " + std::to_string(options.margin) +
                      " after " + std::to_string(options.max_retries) +
                      " attempts");
    }
    const std::size_t row = n_normal + a;
    std::copy(candidate.begin(), candidate.end(), data.features.row(row).begin());
    (*data.labels)[row] = 1;
  }
  return out;
}

}  // namespace gald
