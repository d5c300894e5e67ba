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

#include "gald/benchmark.h"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <sstream>

#include "gald/errors.h"
#include "gald/random.h"

namespace gald {
namespace {

std::string Lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::pair<double, double> MeanStd(const std::vector<double>& values) {
  if (values.empty()) return {0.0, 0.0};
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() < 2) return {mean, 0.0};
  double sq = 0.0;
  for (const double v : values) sq += (v - mean) * (v - mean);
  return {mean, std::sqrt(sq / (n - 1.0))};
}

std::string Fixed(double value, int digits) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.*f", digits, value);
  return buffer;
}

}  // namespace

std::optional<ReferenceShape> FindReferenceShape(const std::string& name) {
  static const std::vector<std::pair<std::vector<std::string>, ReferenceShape>>
      kShapes = {
          {{"thyroid", "annthyroid"}, {"Thyroid", 7200, 6, 534}},
          {{"mammography", "mammo"}, {"Mammography", 11183, 6, 250}},
          {{"seismic", "seismic-bumps"}, {"Seismic", 2584, 15, 170}},
          {{"satimage-2", "satimage2", "satimage_2"}, {"Satimage-2", 5803, 36, 71}},
          {{"vowels"}, {"Vowels", 1456, 12, 50}},
          {{"musk"}, {"Musk", 3062, 166, 97}},
          {{"smtp"}, {"smtp", 95156, 3, 30}},
          {{"http"}, {"http", 567479, 3, 2211}},
      };
  const std::string key = Lower(name);
  for (const auto& [aliases, shape] : kShapes) {
    if (std::find(aliases.begin(), aliases.end(), key) != aliases.end()) {
      return shape;
    }
  }
  return std::nullopt;
}

std::string ProtocolNote(const BenchmarkOptions& options) {
  std::ostringstream out;
  out << "Each run draws a training pool of "
      << options.config.split.train_frac * 100.0
      << "% of the rows uniformly at random; "
      << options.config.split.observed_normal_frac * 100.0
      << "% of the pool's true normals are observed (labeled normal), the rest "
         "of the pool is unlabeled, and the remaining rows form the test set. "
         "AUC and best F1 are measured on the test set and averaged over "
      << options.runs << " runs with seeds " << options.master_seed << ".."
      << options.master_seed + options.runs - 1 << ".";
  if (options.max_rows) {
    out << " Datasets larger than " << *options.max_rows
        << " rows are uniformly subsampled to that size.";
  }
  return out.str();
}

Dataset SubsampleRows(const Dataset& data, std::size_t max_rows,
                      std::uint64_t seed) {
  if (data.size() <= max_rows) return data;
  Rng rng(seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = 0; i < max_rows; ++i) {
    std::swap(order[i], order[i + UniformIndex(rng, data.size() - i)]);
  }
  order.resize(max_rows);
  std::sort(order.begin(), order.end());
  return SelectRows(data, order);
}

DatasetResult BenchmarkDataset(const Dataset& source,
                               const BenchmarkOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  DatasetResult result;
  result.name = source.name;
  result.source_rows = source.size();

  Dataset subsampled;
  const Dataset* data = &source;
  if (options.max_rows && source.size() > *options.max_rows) {
    subsampled = SubsampleRows(source, *options.max_rows,
                               DeriveSeed(options.master_seed, 0x5AB5));
    data = &subsampled;
    result.subsampled = true;
  }
  result.rows = data->size();
  result.dims = data->dims();
  if (data->labels) {
    result.anomalies = static_cast<std::size_t>(
        std::count(data->labels->begin(), data->labels->end(), 1));
  }

  if (const auto shape = FindReferenceShape(source.name)) {
    std::size_t source_anomalies = 0;
    if (source.labels) {
      source_anomalies = static_cast<std::size_t>(
          std::count(source.labels->begin(), source.labels->end(), 1));
    }
    if (source.size() != shape->rows || source.dims() != shape->dims ||
        source_anomalies != shape->anomalies) {
      result.warnings.push_back(
          "expected " + shape->name + " with " + std::to_string(shape->rows) +
          " rows, " + std::to_string(shape->dims) + " features and " +
          std::to_string(shape->anomalies) + " anomalies; file has " +
          std::to_string(source.size()) + ", " +
          std::to_string(source.dims()) + ", " +
          std::to_string(source_anomalies));
    }
  }
  if (result.subsampled) {
    result.warnings.push_back("uniformly subsampled from " +
                              std::to_string(result.source_rows) + " to " +
                              std::to_string(result.rows) + " rows");
  }

  try {
    if (!data->labels) throw DataError("dataset has no label column");
    std::vector<double> aucs;
    std::vector<double> f1s;
    for (std::size_t r = 0; r < options.runs; ++r) {
      const auto run_start = std::chrono::steady_clock::now();
      PipelineConfig config = options.config;
      config.seed = options.master_seed + r;
      const ScenarioSplit split =
          SplitScenario(*data, config.seed, config.split.train_frac,
                        config.split.observed_normal_frac);
      const PipelineResult run = RunPipeline(*data, split, config);
      if (!run.test_report) {
        throw PipelineError("evaluation",
                            "test partition of run " + std::to_string(r) +
                                " does not contain both classes");
      }
      BenchmarkRun entry;
      entry.seed = config.seed;
      entry.auc = run.test_report->auc;
      entry.best_f1 = run.test_report->best_f1;
      entry.selected = run.selected.size();
      entry.selected_true_anomalies = run.selected_true_anomalies.value_or(0);
      entry.timings = run.timings;
      entry.seconds = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - run_start)
                          .count();
      aucs.push_back(entry.auc);
      f1s.push_back(entry.best_f1);
      result.runs.push_back(std::move(entry));
    }
    std::tie(result.mean_auc, result.std_auc) = MeanStd(aucs);
    std::tie(result.mean_f1, result.std_f1) = MeanStd(f1s);
    result.ok = true;
  } catch (const std::exception& e) {
    result.ok = false;
    result.error = e.what();
  }
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return result;
}

BenchmarkReport RunBenchmark(const BenchmarkOptions& options) {
  namespace fs = std::filesystem;
  options.config.Validate();
  if (options.runs < 1) throw ConfigError("runs must be >= 1");
  std::error_code ec;
  if (!fs::is_directory(options.data_dir, ec)) {
    throw DataError("benchmark data directory not found: " + options.data_dir);
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(options.data_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    throw DataError("no .csv files in " + options.data_dir);
  }

  BenchmarkReport report;
  report.config = options.config;
  report.runs = options.runs;
  report.master_seed = options.master_seed;
  for (const auto& file : files) {
    DatasetResult result;
    try {
      const Dataset data = LoadCsv(file.string(), options.label_column);
      result = BenchmarkDataset(data, options);
    } catch (const std::exception& e) {
      result.name = file.stem().string();
      result.ok = false;
      result.error = e.what();
    }
    result.path = file.string();
    report.datasets.push_back(std::move(result));
  }
  return report;
}

nlohmann::json BenchmarkReport::ToJson(bool include_timings) const {
  BenchmarkOptions options;
  options.config = config;
  options.runs = runs;
  options.master_seed = master_seed;

  nlohmann::json datasets_json = nlohmann::json::array();
  for (const auto& d : datasets) {
    nlohmann::json entry = {{"name", d.name},
                            {"ok", d.ok},
                            {"rows", d.rows},
                            {"dims", d.dims},
                            {"anomalies", d.anomalies},
                            {"source_rows", d.source_rows},
                            {"subsampled", d.subsampled},
                            {"warnings", d.warnings}};
    if (!d.ok) {
      entry["error"] = d.error;
    } else {
      entry["mean_auc"] = d.mean_auc;
      entry["std_auc"] = d.std_auc;
      entry["mean_f1"] = d.mean_f1;
      entry["std_f1"] = d.std_f1;
      if (const auto shape = FindReferenceShape(d.name)) {
        entry["reference"] = shape->name;
      }
    }
    nlohmann::json runs_json = nlohmann::json::array();
    for (const auto& run : d.runs) {
      nlohmann::json r = {{"seed", run.seed},
                          {"auc", run.auc},
                          {"best_f1", run.best_f1},
                          {"selected", run.selected},
                          {"selected_true_anomalies",
                           run.selected_true_anomalies}};
      if (include_timings) {
        nlohmann::json stages = nlohmann::json::object();
        for (const auto& t : run.timings) stages[t.stage] = t.seconds;
        r["timings"] = {{"total_seconds", run.seconds}, {"stages", stages}};
      }
      runs_json.push_back(std::move(r));
    }
    entry["runs"] = std::move(runs_json);
    if (include_timings) entry["seconds"] = d.seconds;
    datasets_json.push_back(std::move(entry));
  }
  return {{"protocol", ProtocolNote(options)},
          {"runs", runs},
          {"master_seed", master_seed},
          {"config", config.ToJson()},
          {"datasets", std::move(datasets_json)}};
}

std::string BenchmarkReport::FormatTable() const {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-14s %-17s %-17s %5s %9s\n", "Dataset",
                "AUC (mean+-sd)", "F1 (mean+-sd)", "runs", "seconds");
  out << line;
  double auc_sum = 0.0;
  double f1_sum = 0.0;
  std::size_t ok = 0;
  for (const auto& d : datasets) {
    if (!d.ok) {
      std::snprintf(line, sizeof(line), "%-14s FAILED: %s\n", d.name.c_str(),
                    d.error.c_str());
      out << line;
      continue;
    }
    const std::string auc = Fixed(d.mean_auc, 3) + " +- " + Fixed(d.std_auc, 3);
    const std::string f1 = Fixed(d.mean_f1, 3) + " +- " + Fixed(d.std_f1, 3);
    std::snprintf(line, sizeof(line), "%-14s %-17s %-17s %5zu %9.1f%s\n",
                  d.name.c_str(), auc.c_str(), f1.c_str(), d.runs.size(),
                  d.seconds, d.subsampled ? "  (subsampled)" : "");
    out << line;
    auc_sum += d.mean_auc;
    f1_sum += d.mean_f1;
    ++ok;
  }
  if (ok > 0) {
    std::snprintf(line, sizeof(line), "%-14s %-17s %-17s\n", "Overall",
                  Fixed(auc_sum / ok, 3).c_str(), Fixed(f1_sum / ok, 3).c_str());
    out << line;
  }
  return out.str();
}

}  // namespace gald
