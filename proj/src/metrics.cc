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

#include "memaudit/metrics.h"

#include <algorithm>
#include <cmath>

namespace memaudit {

double MetricCorrectness(const PredictionRecord& record) {
  const auto probs = record.probs().values();
  // max_element returns the first maximum, which is the lowest-index tie.
  const auto argmax = std::max_element(probs.begin(), probs.end());
  return (argmax - probs.begin()) == record.label() ? 1.0 : 0.0;
}

double MetricConfidence(const PredictionRecord& record) {
  return record.probs()[static_cast<size_t>(record.label())];
}

double MetricNegativeEntropy(const PredictionRecord& record) {
  double total = 0.0;
  for (double p : record.probs().values()) {
    total += p * std::log(std::max(p, kEntropyProbabilityFloor));
  }
  return total;
}

double EvaluateMetric(MetricKind kind, const PredictionRecord& record) {
  switch (kind) {
    case MetricKind::kCorrectness:
      return MetricCorrectness(record);
    case MetricKind::kConfidence:
      return MetricConfidence(record);
    case MetricKind::kNegativeEntropy:
      return MetricNegativeEntropy(record);
  }
  return 0.0;
}

std::vector<double> ComputeMetric(MetricKind kind, const PredictionSet& set) {
  std::vector<double> scores;
  scores.reserve(set.size());
  for (const PredictionRecord& record : set) {
    scores.push_back(EvaluateMetric(kind, record));
  }
  return scores;
}

}  // namespace memaudit
