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

#include "gald_cli/cli.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gald/benchmark.h"
#include "gald/dataset.h"
#include "gald/errors.h"
#include "gald/io.h"
#include "gald/parallel.h"
#include "gald/pipeline.h"

namespace gald::cli {
namespace {

// Flags that override individual PipelineConfig fields.
struct ConfigFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> delta;
  std::optional<double> mu;
  std::optional<double> epsilon;
  std::optional<std::size_t> k;
  std::optional<std::size_t> trees;
  std::optional<std::size_t> depth;
  std::optional<std::size_t> partitions;
  std::optional<std::size_t> subsample;
  std::optional<std::string> aggregation;
  std::optional<std::size_t> rounds;
  std::optional<double> learning_rate;
  std::optional<std::size_t> detector_depth;
  std::optional<double> lambda;
  std::optional<double> observed_normal_frac;
  std::optional<double> train_frac;
};

void AddConfigFlags(CLI::App* app, ConfigFlags& flags) {
  app->add_option("--config", flags.config_path,
                  "JSON file with flat PipelineConfig keys");
  app->add_option("--seed", flags.seed, "Random seed");
  app->add_option("--delta", flags.delta,
                  "Fraction of unlabeled samples selected as anomalies");
  app->add_option("--mu", flags.mu, "Weight of the global normal score");
  app->add_option("--epsilon", flags.epsilon, "Weight of observed normals");
  app->add_option("--k", flags.k, "Number of k-means clusters");
  app->add_option("--trees", flags.trees, "Sparsity forest size");
  app->add_option("--depth", flags.depth, "Sparsity tree maximum depth");
  app->add_option("--partitions", flags.partitions,
                  "Maximum intervals per sparsity split");
  app->add_option("--subsample", flags.subsample,
                  "Samples drawn per sparsity tree");
  app->add_option("--aggregation", flags.aggregation,
                  "Sparsity aggregation over trees: mean or max");
  app->add_option("--rounds", flags.rounds, "Boosting rounds");
  app->add_option("--learning-rate", flags.learning_rate,
                  "Boosting shrinkage");
  app->add_option("--detector-depth", flags.detector_depth,
                  "Boosted tree maximum depth");
  app->add_option("--lambda", flags.lambda, "L2 penalty on leaf values");
  app->add_option("--observed-normal-frac", flags.observed_normal_frac,
                  "Fraction of training normals that are observed");
  app->add_option("--train-frac", flags.train_frac,
                  "Fraction of rows in the training pool");
}

template <typename T, typename U>
void Override(const std::optional<T>& flag, U& field) {
  if (flag) field = *flag;
}

PipelineConfig ResolveConfig(const ConfigFlags& flags) {
  PipelineConfig config;
  if (!flags.config_path.empty()) config = LoadConfigFile(flags.config_path);
  Override(flags.seed, config.seed);
  Override(flags.delta, config.fusion.delta);
  Override(flags.mu, config.fusion.mu);
  Override(flags.epsilon, config.fusion.epsilon);
  Override(flags.k, config.clusters.clusters);
  Override(flags.trees, config.forest.num_trees);
  Override(flags.depth, config.forest.max_depth);
  Override(flags.partitions, config.forest.partitions);
  Override(flags.subsample, config.forest.subsample_size);
  if (flags.aggregation) {
    config.forest.aggregation = ParseAggregation(*flags.aggregation);
  }
  Override(flags.rounds, config.detector.rounds);
  Override(flags.learning_rate, config.detector.learning_rate);
  Override(flags.detector_depth, config.detector.max_depth);
  Override(flags.lambda, config.detector.lambda);
  Override(flags.observed_normal_frac, config.split.observed_normal_frac);
  Override(flags.train_frac, config.split.train_frac);
  config.Validate();
  return config;
}

void WriteJson(const nlohmann::json& doc, const std::string& path) {
  WriteFileAtomic(path, doc.dump(1) + "\n");
}

std::string Fixed(double value, int digits) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.*f", digits, value);
  return buffer;
}

struct TrainArgs {
  ConfigFlags config;
  std::string data;
  std::string label_col = "label";
  std::string out;
  std::string scores_out;
  std::string report_out;
  std::string curve_out;
  std::string test_out;
};

int Train(const TrainArgs& args, std::ostream& out) {
  const PipelineConfig config = ResolveConfig(args.config);
  const Dataset data = LoadCsv(args.data, args.label_col);
  const ScenarioSplit split =
      SplitScenario(data, config.seed, config.split.train_frac,
                    config.split.observed_normal_frac);
  const PipelineResult result = RunPipeline(data, split, config);
  result.model.Save(args.out);

  out << "config " << config.ToJson().dump() << "\n";
  out << "data " << args.data << ": " << data.size() << " rows, "
      << data.dims() << " features\n";
  out << "split observed_normals=" << result.observed_count
      << " unlabeled=" << result.unlabeled_count
      << " test=" << result.test_count << "\n";
  for (const auto& timing : result.timings) {
    out << "stage " << timing.stage << " " << Fixed(timing.seconds, 3)
        << " s\n";
  }
  out << "selected " << result.selected.size() << " of "
      << result.unlabeled_count << " unlabeled samples (delta "
      << FormatDouble(config.fusion.delta) << ")\n";
  if (result.selected_true_anomalies) {
    out << "selected true anomalies " << *result.selected_true_anomalies
        << " of " << result.unlabeled_true_anomalies.value_or(0)
        << " unlabeled anomalies\n";
  }
  if (result.test_report) {
    out << "test auc " << Fixed(result.test_report->auc, 4) << " best_f1 "
        << Fixed(result.test_report->best_f1, 4) << "\n";
  } else {
    out << "test partition lacks one class; no evaluation\n";
  }
  out << "model written to " << args.out << "\n";

  if (!args.scores_out.empty()) {
    WriteScoreTableCsv(result.scores, result.training, args.scores_out);
  }
  if (!args.report_out.empty()) WriteJson(result.ReportJson(), args.report_out);
  if (!args.curve_out.empty()) {
    if (!result.test_report) {
      throw PipelineError("evaluation",
                          "no precision-recall curve: test partition lacks "
                          "one class");
    }
    WritePrCurveCsv(*result.test_report, args.curve_out);
  }
  if (!args.test_out.empty()) {
    WriteCsv(SelectRows(data, split.test), args.test_out);
  }
  return kOk;
}

struct ScoreArgs {
  std::string model;
  std::string data;
  std::string label_col;
  std::string out;
  std::optional<double> threshold;
};

int Score(const ScoreArgs& args, std::ostream& out, std::ostream& err) {
  const PipelineModel model = PipelineModel::Load(args.model);
  const Dataset data =
      LoadCsv(args.data, args.label_col.empty()
                             ? std::nullopt
                             : std::optional<std::string>(args.label_col));
  const std::vector<double> scores = model.ScoreRows(data.features);

  std::ostringstream csv;
  csv << "index,score";
  if (args.threshold) csv << ",label";
  if (data.labels) csv << ",true_label";
  csv << "\n";
  for (std::size_t i = 0; i < scores.size(); ++i) {
    csv << i << "," << FormatDouble(scores[i]);
    if (args.threshold) csv << "," << (scores[i] >= *args.threshold ? 1 : 0);
    if (data.labels) csv << "," << (*data.labels)[i];
    csv << "\n";
  }

  // Diagnostics go to stderr when the scores themselves go to stdout.
  std::ostream& log = args.out.empty() ? err : out;
  if (args.out.empty()) {
    out << csv.str();
  } else {
    WriteFileAtomic(args.out, csv.str());
  }
  log << "config " << model.config.ToJson().dump() << "\n";
  log << "scored " << scores.size() << " rows\n";
  if (data.labels) {
    const std::size_t positives = static_cast<std::size_t>(
        std::count(data.labels->begin(), data.labels->end(), 1));
    if (positives == 0 || positives == data.labels->size()) {
      log << "labels hold one class; no auc\n";
    } else {
      const EvalReport report = Evaluate(scores, *data.labels);
      log << "auc " << FormatDouble(report.auc) << " best_f1 "
          << FormatDouble(report.best_f1) << "\n";
    }
  }
  return kOk;
}

int Inspect(const std::string& path, std::ostream& out) {
  const PipelineModel model = PipelineModel::Load(path);
  out << "format " << PipelineModel::kFormatName << " v"
      << PipelineModel::kFormatVersion << "\n";
  out << "features " << model.dims();
  for (const auto& name : model.feature_names) out << " " << name;
  out << "\n";
  out << "config " << model.config.ToJson().dump() << "\n";

  std::size_t leaves = 0;
  std::size_t depth = 0;
  for (const auto& tree : model.forest.trees()) {
    leaves += tree.NumLeaves();
    depth = std::max(depth, tree.Depth());
  }
  out << "sparsity_forest trees=" << model.forest.trees().size()
      << " leaves=" << leaves << " max_depth=" << depth << "\n";
  out << "cluster_model k=" << model.clusters.k() << " objective "
      << FormatDouble(model.clusters.objective) << " iterations "
      << model.clusters.iterations << "\n";
  out << "detector trees=" << model.detector.trees().size() << " base_score "
      << FormatDouble(model.detector.base_score());
  if (!model.detector.loss_trace().empty()) {
    out << " final_training_loss "
        << FormatDouble(model.detector.loss_trace().back());
  }
  out << "\n";
  return kOk;
}

struct BenchmarkArgs {
  ConfigFlags config;
  std::string data;
  std::string label_col = "label";
  std::size_t runs = 10;
  std::optional<std::size_t> max_rows;
  std::string out;
  std::string table_out;
  bool timings = true;
};

int Benchmark(const BenchmarkArgs& args, std::ostream& out) {
  BenchmarkOptions options;
  options.config = ResolveConfig(args.config);
  options.data_dir = args.data;
  options.label_column = args.label_col;
  options.runs = args.runs;
  options.master_seed = options.config.seed;
  options.max_rows = args.max_rows;
  if (options.runs < 1) throw ConfigError("--runs must be >= 1");

  const BenchmarkReport report = RunBenchmark(options);
  const std::string table = report.FormatTable();
  out << ProtocolNote(options) << "\n";
  out << "config " << options.config.ToJson().dump() << "\n\n";
  out << table;
  for (const auto& d : report.datasets) {
    for (const auto& warning : d.warnings) {
      out << "warning " << d.name << ": " << warning << "\n";
    }
  }
  if (!args.out.empty()) WriteJson(report.ToJson(args.timings), args.out);
  if (!args.table_out.empty()) WriteFileAtomic(args.table_out, table);

  for (const auto& d : report.datasets) {
    if (!d.ok) return kPipelineError;
  }
  return kOk;
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Anomaly detection from observed normals and unlabeled data",
               "galdetector"};
  app.require_subcommand(1);
  std::optional<std::size_t> threads;
  app.add_option("--threads", threads, "Worker threads (default: all cores)");

  TrainArgs train;
  CLI::App* train_cmd = app.add_subcommand(
      "train", "Fit a model on a labeled CSV using the scenario split");
  train_cmd->add_option("--data", train.data, "Input CSV")->required();
  train_cmd->add_option("--label-col", train.label_col,
                        "Ground-truth column (1 = anomaly)")
      ->capture_default_str();
  train_cmd->add_option("--out", train.out, "Model JSON path")->required();
  train_cmd->add_option("--scores-out", train.scores_out,
                        "CSV of per-sample fused scores");
  train_cmd->add_option("--report-out", train.report_out,
                        "JSON evaluation report");
  train_cmd->add_option("--curve-out", train.curve_out,
                        "CSV precision-recall curve on the test partition");
  train_cmd->add_option("--test-out", train.test_out,
                        "CSV of the held-out test partition");
  AddConfigFlags(train_cmd, train.config);

  ScoreArgs score;
  CLI::App* score_cmd =
      app.add_subcommand("score", "Score rows of a CSV with a trained model");
  score_cmd->add_option("--model", score.model, "Model JSON")->required();
  score_cmd->add_option("--data", score.data, "Input CSV")->required();
  score_cmd->add_option("--label-col", score.label_col,
                        "Optional ground-truth column; enables AUC output");
  score_cmd->add_option("--out", score.out, "Output CSV (default: stdout)");
  score_cmd->add_option("--threshold", score.threshold,
                        "Adds a label column: 1 when score >= threshold");

  std::string inspect_model;
  CLI::App* inspect_cmd =
      app.add_subcommand("inspect", "Print a summary of a model file");
  inspect_cmd->add_option("model,--model", inspect_model, "Model JSON")
      ->required();

  BenchmarkArgs bench;
  CLI::App* bench_cmd = app.add_subcommand(
      "benchmark", "Repeated-split evaluation of every CSV in a directory");
  bench_cmd->add_option("--data", bench.data, "Directory of labeled CSVs")
      ->required();
  bench_cmd->add_option("--label-col", bench.label_col, "Ground-truth column")
      ->capture_default_str();
  bench_cmd->add_option("--runs", bench.runs, "Runs per dataset")
      ->capture_default_str();
  bench_cmd->add_option("--max-rows", bench.max_rows,
                        "Uniformly subsample larger datasets");
  bench_cmd->add_option("--out", bench.out, "Report JSON path");
  bench_cmd->add_option("--table-out", bench.table_out, "Text table path");
  bench_cmd->add_flag("!--no-timings", bench.timings,
                      "Omit wall-clock fields from the JSON report");
  AddConfigFlags(bench_cmd, bench.config);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int status = app.exit(e, out, err);
    return status == 0 ? kOk : kConfigError;
  }

  try {
    if (threads) {
      if (*threads < 1) throw ConfigError("--threads must be >= 1");
      SetNumThreads(*threads);
    }
    if (*train_cmd) return Train(train, out);
    if (*score_cmd) return Score(score, out, err);
    if (*inspect_cmd) return Inspect(inspect_model, out);
    return Benchmark(bench, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const PipelineError& e) {
    err << "pipeline error: " << e.what() << "\n";
    return kPipelineError;
  } catch (const std::exception& e) {
    err << "pipeline error: " << e.what() << "\n";
    return kPipelineError;
  }
}

}  // namespace gald::cli
