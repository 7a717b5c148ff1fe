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

#include <cmath>
#include <random>
#include <vector>

#include "absl/status/status.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "memaudit/types.h"
#include "oracles.h"

namespace memaudit {
namespace {

using ::memaudit::testing::MakePredictions;
using ::testing::DoubleNear;
using ::testing::HasSubstr;

TEST(ProbabilityVectorTest, RejectsInvalidRows) {
  EXPECT_EQ(ProbabilityVector::Create({1.0}).status().code(),
            absl::StatusCode::kInvalidArgument);
  EXPECT_EQ(ProbabilityVector::Create({0.5, 0.6}).status().code(),
            absl::StatusCode::kInvalidArgument);
  EXPECT_EQ(ProbabilityVector::Create({1.5, -0.5}).status().code(),
            absl::StatusCode::kInvalidArgument);
  EXPECT_EQ(ProbabilityVector::Create({NAN, 1.0}).status().code(),
            absl::StatusCode::kInvalidArgument);
  EXPECT_TRUE(ProbabilityVector::Create({0.5, 0.5 + 5e-7}).ok());
}

TEST(PredictionRecordTest, RejectsOutOfRangeLabel) {
  ProbabilityVector p = *ProbabilityVector::Create({0.2, 0.8});
  EXPECT_FALSE(PredictionRecord::Create(p, 2).ok());
  EXPECT_FALSE(PredictionRecord::Create(p, -1).ok());
  EXPECT_TRUE(PredictionRecord::Create(p, 1).ok());
}

TEST(PredictionSetTest, RejectsEmptyAndMixedClassCounts) {
  EXPECT_FALSE(PredictionSet::Create({}).ok());
  PredictionRecord two =
      *PredictionRecord::Create(*ProbabilityVector::Create({0.5, 0.5}), 0);
  PredictionRecord three = *PredictionRecord::Create(
      *ProbabilityVector::Create({0.2, 0.3, 0.5}), 0);
  absl::StatusOr<PredictionSet> mixed = PredictionSet::Create({two, three});
  EXPECT_EQ(mixed.status().code(), absl::StatusCode::kInvalidArgument);
}

TEST(PredictionSetTest, SubsetKeepsOrder) {
  PredictionSet set =
      MakePredictions({{0.9, 0.1}, {0.2, 0.8}, {0.5, 0.5}}, {0, 1, 1});
  const std::vector<size_t> idx = {2, 0};
  PredictionSet sub = *set.Subset(idx);
  ASSERT_EQ(sub.size(), 2u);
  EXPECT_EQ(sub[0], set[2]);
  EXPECT_EQ(sub[1], set[0]);
  const std::vector<size_t> bad = {3};
  EXPECT_FALSE(set.Subset(bad).ok());
}

TEST(MetricsTest, CorrectnessBreaksArgmaxTiesTowardLowestIndex) {
  PredictionSet set = MakePredictions(
      {{0.4, 0.4, 0.2}, {0.4, 0.4, 0.2}, {0.1, 0.2, 0.7}}, {0, 1, 2});
  EXPECT_EQ(MetricCorrectness(set[0]), 1.0);
  EXPECT_EQ(MetricCorrectness(set[1]), 0.0);
  EXPECT_EQ(MetricCorrectness(set[2]), 1.0);
}

TEST(MetricsTest, ConfidenceIsTrueClassProbability) {
  PredictionSet set = MakePredictions({{0.1, 0.2, 0.7}}, {1});
  EXPECT_EQ(MetricConfidence(set[0]), 0.2);
}

TEST(MetricsTest, NegativeEntropyUsesNaturalLog) {
  PredictionSet set =
      MakePredictions({{0.25, 0.25, 0.25, 0.25}, {1.0, 0.0, 0.0, 0.0}}, {0, 0});
  EXPECT_THAT(MetricNegativeEntropy(set[0]), DoubleNear(-std::log(4.0), 1e-15));
  EXPECT_EQ(MetricNegativeEntropy(set[1]), 0.0);
}

TEST(MetricsTest, NegativeEntropyFloorsZeroProbabilities) {
  PredictionSet set = MakePredictions({{0.5, 0.5, 0.0}}, {0});
  const double expected = std::log(0.5) + 0.0 * std::log(kEntropyProbabilityFloor);
  EXPECT_DOUBLE_EQ(MetricNegativeEntropy(set[0]), expected);
  EXPECT_TRUE(std::isfinite(MetricNegativeEntropy(set[0])));
}

TEST(MetricsTest, RangesHoldOnRandomRows) {
  std::mt19937_64 rng(3);
  std::gamma_distribution<double> gamma(0.3, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    const int classes = 2 + trial % 9;
    std::vector<double> p(static_cast<size_t>(classes));
    double sum = 0.0;
    for (double& v : p) sum += (v = gamma(rng) + 1e-300);
    for (double& v : p) v /= sum;
    PredictionSet set = MakePredictions({p}, {trial % classes});
    const double c = MetricConfidence(set[0]);
    const double h = MetricNegativeEntropy(set[0]);
    EXPECT_GE(c, 0.0);
    EXPECT_LE(c, 1.0);
    EXPECT_LE(h, 1e-15);
    EXPECT_GE(h, -std::log(static_cast<double>(classes)) - 1e-9);
    const double correct = MetricCorrectness(set[0]);
    EXPECT_TRUE(correct == 0.0 || correct == 1.0);
  }
}

TEST(MetricsTest, ComputeMetricIsPerRecord) {
  PredictionSet set = MakePredictions({{0.9, 0.1}, {0.3, 0.7}}, {0, 0});
  EXPECT_THAT(ComputeMetric(MetricKind::kConfidence, set),
              ::testing::ElementsAre(0.9, 0.3));
  EXPECT_THAT(ComputeMetric(MetricKind::kCorrectness, set),
              ::testing::ElementsAre(1.0, 0.0));
  EXPECT_EQ(EvaluateMetric(MetricKind::kNegativeEntropy, set[0]),
            MetricNegativeEntropy(set[0]));
}

TEST(MetricsTest, Names) {
  EXPECT_EQ(MetricName(MetricKind::kCorrectness), "correctness");
  EXPECT_EQ(MetricName(MetricKind::kConfidence), "confidence");
  EXPECT_EQ(MetricName(MetricKind::kNegativeEntropy), "negative_entropy");
  EXPECT_THAT(std::string(ProbabilityVector::Create({0.4, 0.4})
                              .status()
                              .message()),
              HasSubstr("sum"));
}

}  // namespace
}  // namespace memaudit
