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

#ifndef MEMAUDIT_THRESHOLDS_H_
#define MEMAUDIT_THRESHOLDS_H_

#include <array>
#include <cstdint>
#include <functional>
#include <span>

#include "absl/status/statusor.h"
#include "memaudit/dataset.h"
#include "memaudit/types.h"

namespace memaudit {

inline constexpr double kDefaultCalibrationFraction = 0.5;

// (TPR + TNR) / 2 of the rule "member iff score >= tau", where members are
// `train_scores` and non-members are `test_scores`:
//   TPR = |{s in train : s >= tau}| / |train|
//   TNR = |{s in test  : s <  tau}| / |test|
// Both lists must be non-empty.
double BalancedAccuracy(double tau, std::span<const double> train_scores,
                        std::span<const double> test_scores);

struct ThresholdChoice {
  double threshold = 0.0;
  double balanced_accuracy = 0.5;
};

// Scans every observed score (union of both lists) as a candidate threshold
// and returns the one with the highest balanced accuracy, preferring the
// smallest candidate on ties. Fails on an empty list.
absl::StatusOr<ThresholdChoice> SelectThreshold(
    std::span<const double> train_scores, std::span<const double> test_scores);

// One threshold per MetricKind.
class ThresholdSet {
 public:
  ThresholdSet() = default;
  explicit ThresholdSet(std::array<ThresholdChoice, 3> choices)
      : choices_(choices) {}

  const ThresholdChoice& operator[](MetricKind kind) const {
    return choices_[MetricIndex(kind)];
  }
  ThresholdChoice& operator[](MetricKind kind) {
    return choices_[MetricIndex(kind)];
  }
  double threshold(MetricKind kind) const { return (*this)[kind].threshold; }

 private:
  std::array<ThresholdChoice, 3> choices_{};
};

// Thresholds from a calibration model's outputs on its own training split
// (members) and held-out split (non-members).
absl::StatusOr<ThresholdSet> SelectThresholds(const PredictionSet& member_preds,
                                              const PredictionSet& nonmember_preds);

struct CalibrationSplit {
  LabeledDataset train;
  LabeledDataset test;
  double fraction = kDefaultCalibrationFraction;
  uint64_t seed = 0;
};

// Seeded shuffle; floor(fraction * n) rows go to train, the rest to test.
// Rejects splits that leave either side empty.
absl::StatusOr<CalibrationSplit> SplitCalibration(const LabeledDataset& cal,
                                                  double fraction,
                                                  uint64_t seed);

// Black-box access to a trained classifier: returns its outputs on a dataset.
using Classifier =
    std::function<absl::StatusOr<PredictionSet>(const LabeledDataset&)>;
// The training algorithm the auditor can run.
using Trainer =
    std::function<absl::StatusOr<Classifier>(const LabeledDataset&)>;

struct ThresholdInference {
  ThresholdSet thresholds;
  size_t train_size = 0;
  size_t test_size = 0;
};

// Splits `cal`, trains a calibration model on the train side and selects one
// threshold per metric from its outputs on both sides.
absl::StatusOr<ThresholdInference> InferThresholds(const Trainer& trainer,
                                                   const LabeledDataset& cal,
                                                   double fraction,
                                                   uint64_t seed);

}  // namespace memaudit

#endif  // MEMAUDIT_THRESHOLDS_H_
