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

#include "gald/scoring.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "gald/errors.h"
#include "gald/io.h"

namespace gald {
void FusionParams::Validate() const {
  if (!(mu > 0.0)) throw ConfigError("mu must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0,1)");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw ConfigError("epsilon must lie in [0,1]");
  }
}

std::vector<double> MinMaxRescale(std::span<const double> values) {
  std::vector<double> out(values.size(), 0.5);
  if (values.empty()) return out;
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double range = *hi_it - lo;
  if (!(range > 0.0)) return out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = std::clamp((values[i] - lo) / range, 0.0, 1.0);
  }
  return out;
}

ScoreTable GalScore(std::span<const std::size_t> indices,
                    std::span<const double> lss_raw,
                    std::span<const double> gns, double mu) {
  if (lss_raw.size() != gns.size() || indices.size() != gns.size()) {
    throw ConfigError("score vectors differ in length");
  }
  if (!(mu > 0.0)) throw ConfigError("mu must be positive");

  const std::vector<double> lss_norm = MinMaxRescale(lss_raw);
  std::vector<double> combined(gns.size());
  for (std::size_t i = 0; i < gns.size(); ++i) {
    combined[i] = lss_norm[i] - mu * gns[i];
  }
  const std::vector<double> fused = MinMaxRescale(combined);

  ScoreTable table;
  table.mu = mu;
  table.records.resize(gns.size());
  for (std::size_t i = 0; i < gns.size(); ++i) {
    table.records[i] = {indices[i], lss_raw[i], lss_norm[i], gns[i], fused[i]};
  }
  return table;
}

std::size_t SelectionCount(double delta, std::size_t n) {
  // The slack keeps products such as 0.1 * 30 = 3.0000000000000004 at 3.
  const double exact = delta * static_cast<double>(n);
  return std::min(n, static_cast<std::size_t>(std::ceil(exact - 1e-9)));
}

IndexSet SelectPotentialAnomalies(const ScoreTable& table, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw ConfigError("delta must lie in (0,1)");
  }
  if (table.records.empty()) {
    throw PipelineError("selection", "no unlabeled samples to select from");
  }
  std::vector<std::size_t> order(table.size());
  std::iota(order.begin(), order.end(), 0);
  const auto& r = table.records;
  const std::size_t count = std::max<std::size_t>(1, SelectionCount(delta, r.size()));
  std::partial_sort(order.begin(), order.begin() + count, order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (r[a].galscore_norm != r[b].galscore_norm) {
                        return r[a].galscore_norm > r[b].galscore_norm;
                      }
                      return r[a].index < r[b].index;
                    });
  IndexSet selected;
  selected.reserve(count);
  for (std::size_t k = 0; k < count; ++k) selected.push_back(r[order[k]].index);
  std::sort(selected.begin(), selected.end());
  return selected;
}

std::size_t WeightedTrainingSet::CountLabel(int label) const {
  return static_cast<std::size_t>(
      std::count_if(samples.begin(), samples.end(),
                    [label](const WeightedSample& s) { return s.label == label; }));
}

WeightedTrainingSet AssignWeights(const ScoreTable& table,
                                  std::span<const std::size_t> selected,
                                  std::span<const std::size_t> observed_normals,
                                  double epsilon) {
  if (selected.empty()) {
    throw PipelineError("weighting", "no potential anomalies selected");
  }
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw ConfigError("epsilon must lie in [0,1]");
  }
  std::unordered_map<std::size_t, double> score_of;
  score_of.reserve(table.size());
  for (const auto& record : table.records) {
    score_of[record.index] = record.galscore_norm;
  }

  double top = 0.0;
  std::vector<double> scores;
  scores.reserve(selected.size());
  for (const std::size_t index : selected) {
    const auto it = score_of.find(index);
    if (it == score_of.end()) {
      throw PipelineError("weighting", "selected sample " +
                                           std::to_string(index) +
                                           " is not in the score table");
    }
    scores.push_back(it->second);
    top = std::max(top, it->second);
  }
  if (!(top > 0.0)) {
    throw PipelineError("weighting",
                        "every selected sample has a zero fused score; the "
                        "data may be degenerate, review delta and mu");
  }

  WeightedTrainingSet out;
  out.samples.reserve(observed_normals.size() + selected.size());
  for (const std::size_t index : observed_normals) {
    out.samples.push_back({index, 0, epsilon, Provenance::kObservedNormal});
  }
  for (std::size_t k = 0; k < selected.size(); ++k) {
    const double weight = std::max(scores[k] / top, kMinSelectedWeight);
    out.samples.push_back(
        {selected[k], 1, std::min(weight, 1.0), Provenance::kSelectedAnomaly});
  }
  return out;
}

void WriteScoreTableCsv(const ScoreTable& table,
                        const WeightedTrainingSet& training,
                        const std::string& path) {
  std::unordered_map<std::size_t, double> weight_of;
  for (const auto& s : training.samples) {
    if (s.provenance == Provenance::kSelectedAnomaly) {
      weight_of[s.index] = s.weight;
    }
  }
  std::ostringstream out;
  out << "index,lss_raw,lss_norm,gns,galscore_norm,selected,weight\n";
  for (const auto& r : table.records) {
    const auto it = weight_of.find(r.index);
    out << r.index << ',' << FormatDouble(r.lss_raw) << ','
        << FormatDouble(r.lss_norm) << ',' << FormatDouble(r.gns) << ','
        << FormatDouble(r.galscore_norm) << ','
        << (it != weight_of.end() ? 1 : 0) << ','
        << (it != weight_of.end() ? FormatDouble(it->second) : "") << '\n';
  }
  WriteFileAtomic(path, out.str());
}

}  // namespace gald
