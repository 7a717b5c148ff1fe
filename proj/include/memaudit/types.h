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

#ifndef MEMAUDIT_TYPES_H_
#define MEMAUDIT_TYPES_H_

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"

namespace memaudit {

// Maximum allowed |sum(probs) - 1| for a probability vector.
inline constexpr double kProbabilitySumTolerance = 1e-6;

// A classifier's probability output for one sample. Every entry lies in
// [0, 1], there are at least two classes and the entries sum to one within
// kProbabilitySumTolerance.
class ProbabilityVector {
 public:
  static absl::StatusOr<ProbabilityVector> Create(std::vector<double> probs);

  std::span<const double> values() const { return probs_; }
  size_t size() const { return probs_.size(); }
  double operator[](size_t i) const { return probs_[i]; }

  friend bool operator==(const ProbabilityVector&,
                         const ProbabilityVector&) = default;

 private:
  explicit ProbabilityVector(std::vector<double> probs)
      : probs_(std::move(probs)) {}

  std::vector<double> probs_;
};

// One sample as seen through the black box: the model's output and the
// sample's true class.
class PredictionRecord {
 public:
  static absl::StatusOr<PredictionRecord> Create(ProbabilityVector probs,
                                                 int label);

  const ProbabilityVector& probs() const { return probs_; }
  int label() const { return label_; }
  int num_classes() const { return static_cast<int>(probs_.size()); }

  friend bool operator==(const PredictionRecord&,
                         const PredictionRecord&) = default;

 private:
  PredictionRecord(ProbabilityVector probs, int label)
      : probs_(std::move(probs)), label_(label) {}

  ProbabilityVector probs_;
  int label_;
};

// A non-empty, ordered collection of records sharing one class count.
class PredictionSet {
 public:
  static absl::StatusOr<PredictionSet> Create(
      std::vector<PredictionRecord> records);

  const std::vector<PredictionRecord>& records() const { return records_; }
  int num_classes() const { return num_classes_; }
  size_t size() const { return records_.size(); }
  const PredictionRecord& operator[](size_t i) const { return records_[i]; }
  auto begin() const { return records_.begin(); }
  auto end() const { return records_.end(); }

  // Records at `indices`, in that order. Indices must be in range and
  // non-empty.
  absl::StatusOr<PredictionSet> Subset(std::span<const size_t> indices) const;

  friend bool operator==(const PredictionSet&, const PredictionSet&) = default;

 private:
  PredictionSet(std::vector<PredictionRecord> records, int num_classes)
      : records_(std::move(records)), num_classes_(num_classes) {}

  std::vector<PredictionRecord> records_;
  int num_classes_;
};

enum class MetricKind { kCorrectness, kConfidence, kNegativeEntropy };

inline constexpr std::array<MetricKind, 3> kAllMetrics = {
    MetricKind::kCorrectness, MetricKind::kConfidence,
    MetricKind::kNegativeEntropy};

inline constexpr size_t MetricIndex(MetricKind kind) {
  return static_cast<size_t>(kind);
}

std::string_view MetricName(MetricKind kind);

}  // namespace memaudit

#endif  // MEMAUDIT_TYPES_H_
