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

#include "memaudit/thresholds.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "memaudit/metrics.h"

namespace memaudit {
namespace {

double BalancedAccuracyFromCounts(size_t true_positives, size_t train_size,
                                  size_t true_negatives, size_t test_size) {
  const double tpr =
      static_cast<double>(true_positives) / static_cast<double>(train_size);
  const double tnr =
      static_cast<double>(true_negatives) / static_cast<double>(test_size);
  return (tpr + tnr) / 2.0;
}

}  // namespace

double BalancedAccuracy(double tau, std::span<const double> train_scores,
                        std::span<const double> test_scores) {
  const size_t tp = static_cast<size_t>(std::count_if(
      train_scores.begin(), train_scores.end(),
      [tau](double s) { return s >= tau; }));
  const size_t tn = static_cast<size_t>(std::count_if(
      test_scores.begin(), test_scores.end(),
      [tau](double s) { return s < tau; }));
  return BalancedAccuracyFromCounts(tp, train_scores.size(), tn,
                                    test_scores.size());
}

absl::StatusOr<ThresholdChoice> SelectThreshold(
    std::span<const double> train_scores, std::span<const double> test_scores) {
  if (train_scores.empty() || test_scores.empty()) {
    return absl::InvalidArgumentError(
        "threshold selection needs non-empty member and non-member scores");
  }
  std::vector<double> train(train_scores.begin(), train_scores.end());
  std::vector<double> test(test_scores.begin(), test_scores.end());
  for (const std::vector<double>* v : {&train, &test}) {
    if (std::any_of(v->begin(), v->end(),
                    [](double s) { return std::isnan(s); })) {
      return absl::InvalidArgumentError("scores contain NaN");
    }
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());

  const size_t n_train = train.size();
  const size_t n_test = test.size();
  // BA is proportional to tp * n_test + tn * n_train; comparing the integer
  // form keeps tie detection exact.
  size_t i = 0;  // train scores < candidate
  size_t j = 0;  // test scores < candidate
  uint64_t best_key = 0;
  ThresholdChoice best;
  bool have_best = false;
  while (i < n_train || j < n_test) {
    double candidate;
    if (i == n_train) {
      candidate = test[j];
    } else if (j == n_test) {
      candidate = train[i];
    } else {
      candidate = std::min(train[i], test[j]);
    }
    const size_t tp = n_train - i;
    const size_t tn = j;
    const uint64_t key = static_cast<uint64_t>(tp) * n_test +
                         static_cast<uint64_t>(tn) * n_train;
    if (!have_best || key > best_key) {
      best_key = key;
      best.threshold = candidate;
      best.balanced_accuracy =
          BalancedAccuracyFromCounts(tp, n_train, tn, n_test);
      have_best = true;
    }
    while (i < n_train && train[i] == candidate) ++i;
    while (j < n_test && test[j] == candidate) ++j;
  }
  return best;
}

absl::StatusOr<ThresholdSet> SelectThresholds(
    const PredictionSet& member_preds, const PredictionSet& nonmember_preds) {
  ThresholdSet thresholds;
  for (MetricKind kind : kAllMetrics) {
    const std::vector<double> members = ComputeMetric(kind, member_preds);
    const std::vector<double> nonmembers = ComputeMetric(kind, nonmember_preds);
    absl::StatusOr<ThresholdChoice> choice = SelectThreshold(members, nonmembers);
    if (!choice.ok()) return choice.status();
    thresholds[kind] = *choice;
  }
  return thresholds;
}

absl::StatusOr<CalibrationSplit> SplitCalibration(const LabeledDataset& cal,
                                                  double fraction,
                                                  uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("calibration split fraction must be in (0, 1), got ",
                     fraction));
  }
  if (cal.size() < 2) {
    return absl::InvalidArgumentError(absl::StrCat(
        "calibration set needs at least 2 samples, got ", cal.size()));
  }
  const size_t train_size = static_cast<size_t>(
      std::floor(fraction * static_cast<double>(cal.size())));
  if (train_size == 0 || train_size == cal.size()) {
    return absl::InvalidArgumentError(
        absl::StrCat("splitting ", cal.size(), " samples at ", fraction,
                     " leaves one side empty"));
  }
  const std::vector<size_t> order = SeededPermutation(cal.size(), seed);
  const std::span<const size_t> all(order);
  absl::StatusOr<LabeledDataset> train = cal.Subset(all.first(train_size));
  if (!train.ok()) return train.status();
  absl::StatusOr<LabeledDataset> test = cal.Subset(all.subspan(train_size));
  if (!test.ok()) return test.status();
  return CalibrationSplit{*std::move(train), *std::move(test), fraction, seed};
}

absl::StatusOr<ThresholdInference> InferThresholds(const Trainer& trainer,
                                                   const LabeledDataset& cal,
                                                   double fraction,
                                                   uint64_t seed) {
  absl::StatusOr<CalibrationSplit> split = SplitCalibration(cal, fraction, seed);
  if (!split.ok()) return split.status();
  absl::StatusOr<Classifier> model = trainer(split->train);
  if (!model.ok()) return model.status();
  absl::StatusOr<PredictionSet> member_preds = (*model)(split->train);
  if (!member_preds.ok()) return member_preds.status();
  absl::StatusOr<PredictionSet> nonmember_preds = (*model)(split->test);
  if (!nonmember_preds.ok()) return nonmember_preds.status();
  absl::StatusOr<ThresholdSet> thresholds =
      SelectThresholds(*member_preds, *nonmember_preds);
  if (!thresholds.ok()) return thresholds.status();
  return ThresholdInference{*thresholds, split->train.size(),
                            split->test.size()};
}

}  // namespace memaudit
