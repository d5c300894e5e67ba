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

#include "gald/eval.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "gald/errors.h"
#include "gald/io.h"

namespace gald {
namespace {

void CheckInputs(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw std::invalid_argument("scores and labels differ in length");
  }
}

std::size_t CountPositives(std::span<const int> labels) {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
}

nlohmann::json ThresholdJson(double threshold) {
  return std::isfinite(threshold) ? nlohmann::json(threshold) : nlohmann::json();
}

}  // namespace

double F1FromCounts(const ConfusionCounts& counts) {
  if (counts.tp == 0) return 0.0;
  const double tp2 = 2.0 * static_cast<double>(counts.tp);
  return tp2 / (tp2 + static_cast<double>(counts.fp + counts.fn));
}

double Auc(std::span<const double> scores, std::span<const int> labels) {
  CheckInputs(scores, labels);
  const std::size_t n = scores.size();
  const std::size_t positives = CountPositives(labels);
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0) {
    throw std::invalid_argument("AUC needs both positive and negative labels");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Ranks are 1-based; tied groups share their average rank.
  double positive_rank_sum = 0.0;
  for (std::size_t start = 0; start < n;) {
    std::size_t end = start;
    while (end < n && scores[order[end]] == scores[order[start]]) ++end;
    const double midrank = (static_cast<double>(start + 1 + end)) / 2.0;
    for (std::size_t k = start; k < end; ++k) {
      if (labels[order[k]] == 1) positive_rank_sum += midrank;
    }
    start = end;
  }
  const double p = static_cast<double>(positives);
  const double u = positive_rank_sum - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(negatives));
}

std::vector<PrPoint> PrCurve(std::span<const double> scores,
                             std::span<const int> labels) {
  CheckInputs(scores, labels);
  const std::size_t n = scores.size();
  const std::size_t positives = CountPositives(labels);
  if (positives == 0) {
    throw std::invalid_argument("precision-recall needs at least one positive");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  std::vector<PrPoint> curve;
  ConfusionCounts counts{0, 0, positives, n - positives};
  curve.push_back({std::numeric_limits<double>::infinity(), 1.0, 0.0, counts});
  for (std::size_t start = 0; start < n;) {
    const double threshold = scores[order[start]];
    std::size_t end = start;
    for (; end < n && scores[order[end]] == threshold; ++end) {
      if (labels[order[end]] == 1) {
        ++counts.tp;
        --counts.fn;
      } else {
        ++counts.fp;
        --counts.tn;
      }
    }
    const double tp = static_cast<double>(counts.tp);
    curve.push_back({threshold,
                     tp / static_cast<double>(counts.tp + counts.fp),
                     tp / static_cast<double>(positives), counts});
    start = end;
  }
  return curve;
}

namespace {

std::size_t BestPoint(const std::vector<PrPoint>& curve) {
  std::size_t best = 0;
  double best_f1 = -1.0;
  // Thresholds descend along the curve, so >= keeps the lowest on ties.
  for (std::size_t k = 0; k < curve.size(); ++k) {
    const double f1 = F1FromCounts(curve[k].counts);
    if (f1 >= best_f1) {
      best_f1 = f1;
      best = k;
    }
  }
  return best;
}

}  // namespace

F1Result BestF1(std::span<const double> scores, std::span<const int> labels) {
  const auto curve = PrCurve(scores, labels);
  const PrPoint& best = curve[BestPoint(curve)];
  return {F1FromCounts(best.counts), best.threshold};
}

EvalReport Evaluate(std::span<const double> scores,
                    std::span<const int> labels) {
  EvalReport report;
  report.auc = Auc(scores, labels);
  report.pr_curve = PrCurve(scores, labels);
  const PrPoint& best = report.pr_curve[BestPoint(report.pr_curve)];
  report.best_f1 = F1FromCounts(best.counts);
  report.best_threshold = best.threshold;
  report.at_best = best.counts;
  return report;
}

nlohmann::json EvalReport::ToJson() const {
  nlohmann::json curve = nlohmann::json::array();
  for (const auto& p : pr_curve) {
    curve.push_back({{"threshold", ThresholdJson(p.threshold)},
                     {"precision", p.precision},
                     {"recall", p.recall}});
  }
  return {{"auc", auc},
          {"best_f1", best_f1},
          {"best_threshold", ThresholdJson(best_threshold)},
          {"confusion_at_best",
           {{"tp", at_best.tp},
            {"fp", at_best.fp},
            {"fn", at_best.fn},
            {"tn", at_best.tn}}},
          {"pr_curve", std::move(curve)}};
}

void WritePrCurveCsv(const EvalReport& report, const std::string& path) {
  std::ostringstream out;
  out.precision(17);
  out << "threshold,precision,recall,tp,fp,fn,tn\n";
  for (const auto& p : report.pr_curve) {
    if (std::isfinite(p.threshold)) {
      out << p.threshold;
    } else {
      out << "inf";
    }
    out << ',' << p.precision << ',' << p.recall << ',' << p.counts.tp << ','
        << p.counts.fp << ',' << p.counts.fn << ',' << p.counts.tn << '\n';
  }
  WriteFileAtomic(path, out.str());
}

}  // namespace gald
