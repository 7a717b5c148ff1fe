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

#ifndef MEMAUDIT_KS_BASELINE_H_
#define MEMAUDIT_KS_BASELINE_H_

#include <array>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "memaudit/types.h"

namespace memaudit {

// KS-distance ratio baseline:
//   rho_ks = KS(target(Dq), query_model(Dq)) / KS(cal_model(Dq), query_model(Dq))
// with rho_ks >= 1 read as "query forgotten".

enum class OutputSource { kTargetOnQuery, kCalibrationOnQuery, kQueryOnQuery };

// Scalar projection of a PredictionSet used to build the empirical CDF.
enum class ProjectionMode {
  // Every class probability of every record (n * C values).
  kFlattened,
  kMaxProbability,
  // Probability of the true class; identical to the confidence metric.
  kTrueClass,
};

inline constexpr std::array<ProjectionMode, 3> kAllProjectionModes = {
    ProjectionMode::kFlattened, ProjectionMode::kMaxProbability,
    ProjectionMode::kTrueClass};

std::string_view ProjectionModeName(ProjectionMode mode);

class OutputDistribution {
 public:
  // Non-empty, all finite.
  static absl::StatusOr<OutputDistribution> Create(std::vector<double> values,
                                                   OutputSource source);

  const std::vector<double>& values() const { return values_; }
  OutputSource source() const { return source_; }

 private:
  OutputDistribution(std::vector<double> values, OutputSource source)
      : values_(std::move(values)), source_(source) {}

  std::vector<double> values_;
  OutputSource source_;
};

OutputDistribution ProjectOutputs(const PredictionSet& preds,
                                  ProjectionMode mode, OutputSource source);

// Sup-norm distance between the two empirical CDFs, in [0, 1].
double KsDistance(const OutputDistribution& a, const OutputDistribution& b);

struct RhoKsResult {
  double numerator = 0.0;
  double denominator = 0.0;
  double rho_ks = 0.0;
  bool forgotten() const { return rho_ks >= 1.0; }
};

// Fails with FailedPrecondition when the denominator distance is zero, i.e.
// the calibration model's outputs are indistinguishable from the query
// model's.
absl::StatusOr<RhoKsResult> RhoKs(const OutputDistribution& target_on_query,
                                  const OutputDistribution& cal_on_query,
                                  const OutputDistribution& query_on_query);

}  // namespace memaudit

#endif  // MEMAUDIT_KS_BASELINE_H_
