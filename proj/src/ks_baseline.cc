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

#include "memaudit/ks_baseline.h"

#include <algorithm>
#include <cmath>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "memaudit/metrics.h"
#include "memaudit/stats.h"

namespace memaudit {

std::string_view ProjectionModeName(ProjectionMode mode) {
  switch (mode) {
    case ProjectionMode::kFlattened:
      return "flattened";
    case ProjectionMode::kMaxProbability:
      return "max_prob";
    case ProjectionMode::kTrueClass:
      return "true_class";
  }
  return "unknown";
}

absl::StatusOr<OutputDistribution> OutputDistribution::Create(
    std::vector<double> values, OutputSource source) {
  if (values.empty()) {
    return absl::InvalidArgumentError("output distribution is empty");
  }
  if (!std::all_of(values.begin(), values.end(),
                   [](double v) { return std::isfinite(v); })) {
    return absl::InvalidArgumentError("output distribution has non-finite values");
  }
  return OutputDistribution(std::move(values), source);
}

OutputDistribution ProjectOutputs(const PredictionSet& preds,
                                  ProjectionMode mode, OutputSource source) {
  std::vector<double> values;
  switch (mode) {
    case ProjectionMode::kFlattened:
      values.reserve(preds.size() * static_cast<size_t>(preds.num_classes()));
      for (const PredictionRecord& r : preds) {
        const auto probs = r.probs().values();
        values.insert(values.end(), probs.begin(), probs.end());
      }
      break;
    case ProjectionMode::kMaxProbability:
      values.reserve(preds.size());
      for (const PredictionRecord& r : preds) {
        const auto probs = r.probs().values();
        values.push_back(*std::max_element(probs.begin(), probs.end()));
      }
      break;
    case ProjectionMode::kTrueClass:
      values = ComputeMetric(MetricKind::kConfidence, preds);
      break;
  }
  // Validated probabilities are finite and the set is non-empty.
  return *OutputDistribution::Create(std::move(values), source);
}

double KsDistance(const OutputDistribution& a, const OutputDistribution& b) {
  return KsTwoSampleStatistic(a.values(), b.values());
}

absl::StatusOr<RhoKsResult> RhoKs(const OutputDistribution& target_on_query,
                                  const OutputDistribution& cal_on_query,
                                  const OutputDistribution& query_on_query) {
  RhoKsResult result;
  result.numerator = KsDistance(target_on_query, query_on_query);
  result.denominator = KsDistance(cal_on_query, query_on_query);
  if (result.denominator == 0.0) {
    return absl::FailedPreconditionError(
        "degenerate calibration: KS distance between calibration-model and "
        "query-model outputs is zero");
  }
  result.rho_ks = result.numerator / result.denominator;
  return result;
}

}  // namespace memaudit
