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

#include "gald/pipeline.h"

#include <chrono>
#include <functional>
#include <map>

#include "gald/errors.h"
#include "gald/io.h"
#include "gald/random.h"

namespace gald {
namespace {

using Json = nlohmann::json;
using Setter = std::function<void(PipelineConfig&, const Json&)>;

template <typename T>
Setter Field(T PipelineConfig::*group, auto T::*member) {
  return [group, member](PipelineConfig& config, const Json& value) {
    using Value = std::remove_reference_t<decltype(config.*group.*member)>;
    if constexpr (std::is_unsigned_v<Value>) {
      if (!value.is_number_unsigned()) {
        throw ConfigError("expected a non-negative integer");
      }
    } else if constexpr (std::is_floating_point_v<Value>) {
      if (!value.is_number()) throw ConfigError("expected a number");
    }
    config.*group.*member = value.get<Value>();
  };
}

const std::map<std::string, Setter>& Setters() {
  static const auto* setters = new std::map<std::string, Setter>{
      {"trees", Field(&PipelineConfig::forest, &ForestConfig::num_trees)},
      {"partitions", Field(&PipelineConfig::forest, &ForestConfig::partitions)},
      {"max_depth", Field(&PipelineConfig::forest, &ForestConfig::max_depth)},
      {"subsample_size",
       Field(&PipelineConfig::forest, &ForestConfig::subsample_size)},
      {"aggregation",
       [](PipelineConfig& c, const Json& v) {
         if (!v.is_string()) throw ConfigError("expected a string");
         c.forest.aggregation = ParseAggregation(v.get<std::string>());
       }},
      {"clusters", Field(&PipelineConfig::clusters, &KMeansOptions::clusters)},
      {"kmeans_max_iter",
       Field(&PipelineConfig::clusters, &KMeansOptions::max_iter)},
      {"kmeans_tol", Field(&PipelineConfig::clusters, &KMeansOptions::tol)},
      {"mu", Field(&PipelineConfig::fusion, &FusionParams::mu)},
      {"delta", Field(&PipelineConfig::fusion, &FusionParams::delta)},
      {"epsilon", Field(&PipelineConfig::fusion, &FusionParams::epsilon)},
      {"rounds", Field(&PipelineConfig::detector, &DetectorParams::rounds)},
      {"learning_rate",
       Field(&PipelineConfig::detector, &DetectorParams::learning_rate)},
      {"detector_depth",
       Field(&PipelineConfig::detector, &DetectorParams::max_depth)},
      {"lambda", Field(&PipelineConfig::detector, &DetectorParams::lambda)},
      {"gamma", Field(&PipelineConfig::detector, &DetectorParams::gamma)},
      {"min_child_weight",
       Field(&PipelineConfig::detector, &DetectorParams::min_child_weight)},
      {"detector_subsample",
       Field(&PipelineConfig::detector, &DetectorParams::subsample)},
      {"train_frac", Field(&PipelineConfig::split, &SplitParams::train_frac)},
      {"observed_normal_frac",
       Field(&PipelineConfig::split, &SplitParams::observed_normal_frac)},
      {"seed",
       [](PipelineConfig& c, const Json& v) {
         if (!v.is_number_unsigned()) {
           throw ConfigError("expected a non-negative integer");
         }
         c.seed = v.get<std::uint64_t>();
       }},
  };
  return *setters;
}

class StageClock {
 public:
  explicit StageClock(std::vector<StageTiming>* timings) : timings_(*timings) {}

  template <typename Fn>
  auto Run(const std::string& stage, Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    try {
      if constexpr (std::is_void_v<decltype(fn())>) {
        fn();
        Record(stage, start);
      } else {
        auto out = fn();
        Record(stage, start);
        return out;
      }
    } catch (const PipelineError&) {
      throw;
    } catch (const std::exception& e) {
      throw PipelineError(stage, e.what());
    }
  }

 private:
  void Record(const std::string& stage,
              std::chrono::steady_clock::time_point start) {
    const std::chrono::duration<double> elapsed =
        std::chrono::steady_clock::now() - start;
    timings_.push_back({stage, elapsed.count()});
  }

  std::vector<StageTiming>& timings_;
};

std::optional<EvalReport> MaybeEvaluate(const Dataset& data,
                                        std::span<const std::size_t> rows,
                                        std::span<const double> scores) {
  if (!data.labels || rows.empty()) return std::nullopt;
  std::vector<int> labels;
  labels.reserve(rows.size());
  for (const std::size_t i : rows) labels.push_back((*data.labels)[i]);
  const auto positives = std::count(labels.begin(), labels.end(), 1);
  if (positives == 0 || positives == static_cast<long>(labels.size())) {
    return std::nullopt;
  }
  return Evaluate(scores, labels);
}

}  // namespace

void PipelineConfig::Validate() const {
  forest.Validate();
  if (clusters.clusters < 1) throw ConfigError("clusters must be >= 1");
  if (clusters.max_iter < 1) throw ConfigError("kmeans_max_iter must be >= 1");
  if (!(clusters.tol > 0.0)) throw ConfigError("kmeans_tol must be positive");
  fusion.Validate();
  detector.Validate();
  if (detector.rounds < 1) throw ConfigError("rounds must be >= 1");
  if (!(split.train_frac > 0.0 && split.train_frac < 1.0)) {
    throw ConfigError("train_frac must lie in (0,1)");
  }
  if (!(split.observed_normal_frac > 0.0 && split.observed_normal_frac < 1.0)) {
    throw ConfigError("observed_normal_frac must lie in (0,1)");
  }
}

nlohmann::json PipelineConfig::ToJson() const {
  return {{"trees", forest.num_trees},
          {"partitions", forest.partitions},
          {"max_depth", forest.max_depth},
          {"subsample_size", forest.subsample_size},
          {"aggregation", AggregationName(forest.aggregation)},
          {"clusters", clusters.clusters},
          {"kmeans_max_iter", clusters.max_iter},
          {"kmeans_tol", clusters.tol},
          {"mu", fusion.mu},
          {"delta", fusion.delta},
          {"epsilon", fusion.epsilon},
          {"rounds", detector.rounds},
          {"learning_rate", detector.learning_rate},
          {"detector_depth", detector.max_depth},
          {"lambda", detector.lambda},
          {"gamma", detector.gamma},
          {"min_child_weight", detector.min_child_weight},
          {"detector_subsample", detector.subsample},
          {"train_frac", split.train_frac},
          {"observed_normal_frac", split.observed_normal_frac},
          {"seed", seed}};
}

PipelineConfig PipelineConfig::FromJson(const nlohmann::json& doc,
                                        PipelineConfig base) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  const auto& setters = Setters();
  for (const auto& [key, value] : doc.items()) {
    const auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError("unknown config key '" + key + "'");
    try {
      it->second(base, value);
    } catch (const ConfigError& e) {
      throw ConfigError("config key '" + key + "': " + e.what());
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config key '" + key + "': " + e.what());
    }
  }
  return base;
}

PipelineConfig PipelineConfig::FromJson(const nlohmann::json& doc) {
  return FromJson(doc, PipelineConfig{});
}

PipelineConfig LoadConfigFile(const std::string& path) {
  std::string text;
  try {
    text = ReadFile(path);
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cannot parse config " + path + ": " + e.what());
  }
  return PipelineConfig::FromJson(doc);
}

double PipelineModel::Score(std::span<const double> raw) const {
  std::vector<double> normalized(dims());
  normalizer.ApplyRow(raw, normalized);
  return detector.PredictScore(normalized);
}

std::vector<double> PipelineModel::ScoreRows(const Matrix& raw) const {
  if (raw.cols() != dims()) {
    throw DataError("model expects " + std::to_string(dims()) +
                    " features, data has " + std::to_string(raw.cols()));
  }
  const Matrix normalized = normalizer.Transform(raw);
  std::vector<double> scores(raw.rows());
  for (std::size_t i = 0; i < raw.rows(); ++i) {
    scores[i] = detector.PredictScore(normalized.row(i));
  }
  return scores;
}

nlohmann::json PipelineModel::ToJson() const {
  return {{"format", kFormatName},
          {"version", kFormatVersion},
          {"seed", config.seed},
          {"config", config.ToJson()},
          {"feature_names", feature_names},
          {"normalizer", {{"min", normalizer.min()}, {"max", normalizer.max()}}},
          {"forest", forest.ToJson()},
          {"cluster_model", clusters.ToJson()},
          {"fusion",
           {{"mu", config.fusion.mu},
            {"delta", config.fusion.delta},
            {"epsilon", config.fusion.epsilon}}},
          {"detector", detector.ToJson()}};
}

PipelineModel PipelineModel::FromJson(const nlohmann::json& doc) {
  try {
    if (doc.at("format").get<std::string>() != kFormatName) {
      throw DataError("not a galdetector model document");
    }
    if (doc.at("version").get<int>() != kFormatVersion) {
      throw DataError("unsupported model version " +
                      doc.at("version").dump());
    }
    PipelineModel model;
    model.config = PipelineConfig::FromJson(doc.at("config"));
    model.feature_names =
        doc.at("feature_names").get<std::vector<std::string>>();
    model.normalizer =
        Normalizer(doc.at("normalizer").at("min").get<std::vector<double>>(),
                   doc.at("normalizer").at("max").get<std::vector<double>>());
    model.forest = SparsityForest::FromJson(doc.at("forest"));
    model.clusters = ClusterModel::FromJson(doc.at("cluster_model"));
    model.detector = Detector::FromJson(doc.at("detector"));
    if (model.detector.dims() != model.dims() ||
        model.forest.dims() != model.dims() ||
        model.clusters.dims() != model.dims()) {
      throw DataError("model components disagree on feature dimension");
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed model document: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("malformed model config: ") + e.what());
  }
}

void PipelineModel::Save(const std::string& path) const {
  WriteFileAtomic(path, ToJson().dump(1) + "\n");
}

PipelineModel PipelineModel::Load(const std::string& path) {
  const std::string text = ReadFile(path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("cannot parse model " + path + ": " + e.what());
  }
  return FromJson(doc);
}

nlohmann::json PipelineResult::ReportJson() const {
  nlohmann::json out = {
      {"seed", model.config.seed},
      {"config", model.config.ToJson()},
      {"split",
       {{"observed_normals", observed_count},
        {"unlabeled", unlabeled_count},
        {"test", test_count}}},
      {"selected", selected.size()},
      {"training_samples", training.samples.size()},
      {"stages",
       {"normalize", "sparsity_forest", "normal_model", "local_global_scores",
        "fusion", "selection", "weighting", "detector", "evaluation"}}};
  if (selected_true_anomalies) {
    out["selected_true_anomalies"] = *selected_true_anomalies;
  }
  if (unlabeled_true_anomalies) {
    out["unlabeled_true_anomalies"] = *unlabeled_true_anomalies;
  }
  out["test_report"] = test_report ? test_report->ToJson() : nlohmann::json();
  out["unlabeled_report"] =
      unlabeled_report ? unlabeled_report->ToJson() : nlohmann::json();
  return out;
}

PipelineResult RunPipeline(const Dataset& data, const ScenarioSplit& split,
                           const PipelineConfig& config) {
  config.Validate();
  data.Validate();
  ValidateSplit(data, split);

  PipelineResult result;
  StageClock clock(&result.timings);
  PipelineModel& model = result.model;
  model.config = config;
  model.feature_names = data.feature_names;
  result.observed_count = split.observed_normals.size();
  result.unlabeled_count = split.unlabeled.size();
  result.test_count = split.test.size();

  const IndexSet pool = split.TrainingPool();
  const Matrix normalized = clock.Run("normalize", [&] {
    model.normalizer = FitNormalizer(data, pool);
    return model.normalizer.Transform(data.features);
  });

  clock.Run("sparsity_forest", [&] {
    model.forest = SparsityForest::Fit(normalized.Rows(pool), config.forest,
                                       DeriveSeed(config.seed, 1));
  });
  clock.Run("normal_model", [&] {
    model.clusters = FitKMeans(normalized.Rows(split.observed_normals),
                               config.clusters, DeriveSeed(config.seed, 2));
  });

  std::vector<double> lss;
  std::vector<double> gns;
  clock.Run("local_global_scores", [&] {
    lss = model.forest.ScoreRows(normalized, split.unlabeled);
    gns = GlobalNormalScores(model.clusters, normalized, split.unlabeled);
    result.observed_lss =
        model.forest.ScoreRows(normalized, split.observed_normals);
    result.observed_gns = GlobalNormalScores(model.clusters, normalized,
                                             split.observed_normals);
  });

  clock.Run("fusion", [&] {
    result.scores = GalScore(split.unlabeled, lss, gns, config.fusion.mu);
  });
  clock.Run("selection", [&] {
    result.selected =
        SelectPotentialAnomalies(result.scores, config.fusion.delta);
  });
  clock.Run("weighting", [&] {
    result.training = AssignWeights(result.scores, result.selected,
                                    split.observed_normals,
                                    config.fusion.epsilon);
  });
  clock.Run("detector", [&] {
    model.detector = TrainDetector(normalized, result.training, config.detector,
                                   DeriveSeed(config.seed, 3));
  });

  clock.Run("evaluation", [&] {
    result.test_scores = model.detector.PredictRows(normalized, split.test);
    result.unlabeled_scores =
        model.detector.PredictRows(normalized, split.unlabeled);
    result.test_report = MaybeEvaluate(data, split.test, result.test_scores);
    result.unlabeled_report =
        MaybeEvaluate(data, split.unlabeled, result.unlabeled_scores);
    if (data.labels) {
      const auto& labels = *data.labels;
      std::size_t hits = 0;
      for (const std::size_t i : result.selected) hits += labels[i];
      result.selected_true_anomalies = hits;
      std::size_t total = 0;
      for (const std::size_t i : split.unlabeled) total += labels[i];
      result.unlabeled_true_anomalies = total;
    }
  });
  return result;
}

}  // namespace gald
