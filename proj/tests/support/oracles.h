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

#ifndef GALD_TESTS_SUPPORT_ORACLES_H_
#define GALD_TESTS_SUPPORT_ORACLES_H_

// Brute-force reference implementations. None of them calls into the library
// code they are used to check.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gald/dataset.h"

namespace gald::testing {

// Optimal partition found by enumerating every subset of gaps between
// adjacent distinct values. Gap g lies between distinct values g and g + 1.
struct ExhaustiveSplit {
  double score = 0.0;
  std::vector<std::size_t> gaps;
};

// Objective sum_i (len_i/L) (c_i/len_i - n/L)^2 with cuts at gap midpoints;
// among optima within `tie_tolerance` (relative), the lexicographically
// smallest gap list wins.
ExhaustiveSplit ExhaustiveBestSplit(std::span<const double> sorted, double lo,
                                    double hi, std::size_t max_intervals,
                                    double tie_tolerance);

// Gap index of each breakpoint relative to the distinct values of `sorted`;
// SIZE_MAX for a breakpoint that is not strictly between two distinct values
// with the upper one at or above it.
std::vector<std::size_t> BreakpointGaps(std::span<const double> sorted,
                                        std::span<const double> breakpoints);

// Fraction of (positive, negative) pairs ordered correctly, ties counting
// one half.
double PairCountAuc(std::span<const double> scores,
                    std::span<const int> labels);

// Best F1 over thresholds at every distinct score (flag score >= threshold),
// compared as exact fractions; ties go to the lowest threshold.
struct ExhaustiveF1 {
  std::uint64_t numerator = 0;    // 2 TP
  std::uint64_t denominator = 1;  // 2 TP + FP + FN
  double threshold = 0.0;
};
ExhaustiveF1 ExhaustiveBestF1(std::span<const double> scores,
                              std::span<const int> labels);

// Sum over points of the Euclidean distance to the closest center.
double NearestCenterDistanceSum(const Matrix& centers, const Matrix& points);

// Squared Euclidean distance.
double SquaredDistance(std::span<const double> a, std::span<const double> b);

// Weighted logistic loss of margins, computed directly from the definition.
double DirectLogLoss(std::span<const double> margins,
                     std::span<const int> labels,
                     std::span<const double> weights);

}  // namespace gald::testing

#endif  // GALD_TESTS_SUPPORT_ORACLES_H_
