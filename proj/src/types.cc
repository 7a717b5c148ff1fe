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

#include "memaudit/types.h"

#include <cmath>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace memaudit {

absl::StatusOr<ProbabilityVector> ProbabilityVector::Create(
    std::vector<double> probs) {
  if (probs.size() < 2) {
    return absl::InvalidArgumentError(absl::StrCat(
        "probability vector needs at least 2 classes, got ", probs.size()));
  }
  double sum = 0.0;
  for (size_t i = 0; i < probs.size(); ++i) {
    const double p = probs[i];
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
      return absl::InvalidArgumentError(
          absl::StrCat("probability ", i, " = ", p, " is outside [0, 1]"));
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kProbabilitySumTolerance) {
    return absl::InvalidArgumentError(absl::StrCat(
        "probabilities sum to ", sum, ", expected 1 within ",
        kProbabilitySumTolerance));
  }
  return ProbabilityVector(std::move(probs));
}

absl::StatusOr<PredictionRecord> PredictionRecord::Create(
    ProbabilityVector probs, int label) {
  if (label < 0 || static_cast<size_t>(label) >= probs.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "label ", label, " is outside [0, ", probs.size(), ")"));
  }
  return PredictionRecord(std::move(probs), label);
}

absl::StatusOr<PredictionSet> PredictionSet::Create(
    std::vector<PredictionRecord> records) {
  if (records.empty()) {
    return absl::InvalidArgumentError("prediction set is empty");
  }
  const int num_classes = records.front().num_classes();
  for (size_t i = 0; i < records.size(); ++i) {
    if (records[i].num_classes() != num_classes) {
      return absl::InvalidArgumentError(
          absl::StrCat("record ", i, " has ", records[i].num_classes(),
                       " classes, expected ", num_classes));
    }
  }
  return PredictionSet(std::move(records), num_classes);
}

absl::StatusOr<PredictionSet> PredictionSet::Subset(
    std::span<const size_t> indices) const {
  std::vector<PredictionRecord> picked;
  picked.reserve(indices.size());
  for (size_t index : indices) {
    if (index >= records_.size()) {
      return absl::OutOfRangeError(
          absl::StrCat("record index ", index, " >= ", records_.size()));
    }
    picked.push_back(records_[index]);
  }
  return Create(std::move(picked));
}

std::string_view MetricName(MetricKind kind) {
  switch (kind) {
    case MetricKind::kCorrectness:
      return "correctness";
    case MetricKind::kConfidence:
      return "confidence";
    case MetricKind::kNegativeEntropy:
      return "negative_entropy";
  }
  return "unknown";
}

}  // namespace memaudit
