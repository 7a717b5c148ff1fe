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

#include <vector>

#include "absl/status/status.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "memaudit/metrics.h"
#include "oracles.h"

namespace memaudit {
namespace {

using ::memaudit::testing::MakePredictions;
using ::testing::ElementsAre;
using ::testing::HasSubstr;

OutputDistribution Dist(std::vector<double> values) {
  return *OutputDistribution::Create(std::move(values),
                                     OutputSource::kTargetOnQuery);
}

TEST(ProjectOutputsTest, Modes) {
  PredictionSet preds =
      MakePredictions({{0.7, 0.2, 0.1}, {0.1, 0.3, 0.6}}, {1, 2});
  EXPECT_THAT(ProjectOutputs(preds, ProjectionMode::kFlattened,
                             OutputSource::kTargetOnQuery)
                  .values(),
              ElementsAre(0.7, 0.2, 0.1, 0.1, 0.3, 0.6));
  EXPECT_THAT(ProjectOutputs(preds, ProjectionMode::kMaxProbability,
                             OutputSource::kTargetOnQuery)
                  .values(),
              ElementsAre(0.7, 0.6));
  OutputDistribution true_class = ProjectOutputs(
      preds, ProjectionMode::kTrueClass, OutputSource::kQueryOnQuery);
  EXPECT_EQ(true_class.values(), ComputeMetric(MetricKind::kConfidence, preds));
  EXPECT_EQ(true_class.source(), OutputSource::kQueryOnQuery);
}

TEST(OutputDistributionTest, RejectsEmptyAndNonFinite) {
  EXPECT_FALSE(
      OutputDistribution::Create({}, OutputSource::kTargetOnQuery).ok());
  EXPECT_FALSE(
      OutputDistribution::Create({0.1, INFINITY}, OutputSource::kTargetOnQuery)
          .ok());
}

TEST(KsDistanceTest, SymmetricAndBounded) {
  OutputDistribution a = Dist({0.1, 0.2, 0.3});
  OutputDistribution b = Dist({0.25, 0.9});
  EXPECT_EQ(KsDistance(a, b), KsDistance(b, a));
  EXPECT_DOUBLE_EQ(KsDistance(a, b), 2.0 / 3.0);
  EXPECT_EQ(KsDistance(a, a), 0.0);
  EXPECT_EQ(KsDistance(Dist({0.0}), Dist({1.0})), 1.0);
}

TEST(RhoKsTest, Ratio) {
  OutputDistribution target = Dist({0.1, 0.2, 0.3, 0.4});
  OutputDistribution cal = Dist({0.5, 0.6, 0.7, 0.8});
  OutputDistribution query = Dist({0.15, 0.25, 0.35, 0.45});
  absl::StatusOr<RhoKsResult> rho = RhoKs(target, cal, query);
  ASSERT_TRUE(rho.ok());
  EXPECT_DOUBLE_EQ(rho->numerator, 0.25);
  EXPECT_DOUBLE_EQ(rho->denominator, 1.0);
  EXPECT_DOUBLE_EQ(rho->rho_ks, 0.25);
  EXPECT_FALSE(rho->forgotten());
  absl::StatusOr<RhoKsResult> swapped = RhoKs(cal, target, query);
  EXPECT_DOUBLE_EQ(swapped->rho_ks, 4.0);
  EXPECT_TRUE(swapped->forgotten());
}

TEST(RhoKsTest, DegenerateDenominator) {
  OutputDistribution target = Dist({0.1, 0.2});
  OutputDistribution same = Dist({0.5, 0.6});
  absl::StatusOr<RhoKsResult> rho = RhoKs(target, same, same);
  EXPECT_EQ(rho.status().code(), absl::StatusCode::kFailedPrecondition);
  EXPECT_THAT(std::string(rho.status().message()), HasSubstr("degenerate"));
}

TEST(ProjectionModeTest, Names) {
  EXPECT_EQ(ProjectionModeName(ProjectionMode::kFlattened), "flattened");
  EXPECT_EQ(ProjectionModeName(ProjectionMode::kMaxProbability), "max_prob");
  EXPECT_EQ(ProjectionModeName(ProjectionMode::kTrueClass), "true_class");
}

}  // namespace
}  // namespace memaudit
