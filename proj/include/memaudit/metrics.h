//
// Copyright 2026 The memaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef MEMAUDIT_METRICS_H_
#define MEMAUDIT_METRICS_H_

#include <vector>

#include "memaudit/types.h"

namespace memaudit {

// Per-sample membership scores. Larger values mean the model treats the
// sample more like something it was trained on.

// Lower bound used inside the logarithm so that 0 * log(0) evaluates to 0.
inline constexpr double kEntropyProbabilityFloor = 1e-12;

// 1 if the arg-max class equals the label, else 0. Ties go to the lowest
// class index.
double MetricCorrectness(const PredictionRecord& record);

// Probability assigned to the true class.
double MetricConfidence(const PredictionRecord& record);

// sum_i p_i * ln(p_i), in [-ln C, 0].
double MetricNegativeEntropy(const PredictionRecord& record);

double EvaluateMetric(MetricKind kind, const PredictionRecord& record);

// One score per record, in record order.
std::vector<double> ComputeMetric(MetricKind kind, const PredictionSet& set);

}  // namespace memaudit

#endif  // MEMAUDIT_METRICS_H_
