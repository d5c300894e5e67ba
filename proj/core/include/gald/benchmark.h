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

#ifndef GALD_BENCHMARK_H_
#define GALD_BENCHMARK_H_

// Repeated-split evaluation over a directory of labeled CSV exports.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nlohmann/json.hpp"
#include "gald/dataset.h"
#include "gald/pipeline.h"

namespace gald {

// Published shape of a well-known benchmark dataset, used to sanity check
// user-supplied exports.
struct ReferenceShape {
  std::string name;
  std::size_t rows = 0;
  std::size_t dims = 0;
  std::size_t anomalies = 0;
};

// Matches file stems case-insensitively, with common aliases (for example
// "annthyroid" for Thyroid).
std::optional<ReferenceShape> FindReferenceShape(const std::string& name);

struct BenchmarkOptions {
  std::string data_dir;
  std::string label_column = "label";
  std::size_t runs = 10;
  // Run r uses seed master_seed + r.
  std::uint64_t master_seed = 0;
  // Uniformly subsample larger datasets to this many rows.
  std::optional<std::size_t> max_rows;
  PipelineConfig config;
};

struct BenchmarkRun {
  std::uint64_t seed = 0;
  double auc = 0.0;
  double best_f1 = 0.0;
  std::size_t selected = 0;
  std::size_t selected_true_anomalies = 0;
  std::vector<StageTiming> timings;
  double seconds = 0.0;
};

struct DatasetResult {
  std::string name;
  std::string path;
  bool ok = false;
  std::string error;
  std::size_t rows = 0;
  std::size_t dims = 0;
  std::size_t anomalies = 0;
  // Rows in the file before subsampling; equals rows when not subsampled.
  std::size_t source_rows = 0;
  bool subsampled = false;
  std::vector<std::string> warnings;
  std::vector<BenchmarkRun> runs;
  double mean_auc = 0.0;
  double std_auc = 0.0;
  double mean_f1 = 0.0;
  double std_f1 = 0.0;
  double seconds = 0.0;
};

struct BenchmarkReport {
  std::vector<DatasetResult> datasets;
  PipelineConfig config;
  std::size_t runs = 0;
  std::uint64_t master_seed = 0;

  // Timing fields are the only non-deterministic content.
  nlohmann::json ToJson(bool include_timings = true) const;
  // Plain-text table with one row per dataset: mean AUC and best F1.
  std::string FormatTable() const;
};

// Protocol description written into every report header.
std::string ProtocolNote(const BenchmarkOptions& options);

// Runs the protocol on one dataset. Never throws for pipeline failures; they
// are recorded in the result.
DatasetResult BenchmarkDataset(const Dataset& data,
                               const BenchmarkOptions& options);

// Every *.csv in options.data_dir, in file name order.
BenchmarkReport RunBenchmark(const BenchmarkOptions& options);

// Uniform row subsample without replacement, keeping the original order.
Dataset SubsampleRows(const Dataset& data, std::size_t max_rows,
                      std::uint64_t seed);

}  // namespace gald

#endif  // GALD_BENCHMARK_H_
