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

#ifndef MEMAUDIT_AGGREGATION_H_
#define MEMAUDIT_AGGREGATION_H_

#include <cstdint>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "memaudit/thresholds.h"
#include "memaudit/types.h"

namespace memaudit {

inline constexpr double kDefaultAlpha = 0.1;
// Added to the standard deviation in the t statistic so an all-ones vector
// gives t = 0 instead of 0/0.
inline constexpr double kTTestEpsilon = 1e-8;

// Per-query-sample membership bits (1 = inferred member).
class MembershipVector {
 public:
  static absl::StatusOr<MembershipVector> Create(std::vector<uint8_t> bits);

  const std::vector<uint8_t>& bits() const { return bits_; }
  size_t size() const { return bits_.size(); }
  size_t ones() const;
  double mean() const;

 private:
  explicit MembershipVector(std::vector<uint8_t> bits)
      : bits_(std::move(bits)) {}

  std::vector<uint8_t> bits_;
};

enum class TestKind { kTTest, kKsTest };
enum class Verdict { kMemorized, kRemoved };

std::string_view TestKindName(TestKind kind);
std::string_view VerdictName(Verdict verdict);

struct AuditReport {
  double rho_ema = 1.0;
  TestKind test_kind = TestKind::kTTest;
  double alpha = kDefaultAlpha;
  Verdict verdict = Verdict::kMemorized;
  double member_fraction = 1.0;
  size_t query_size = 0;
};

// Bit i is 1 iff at least one metric of record i reaches its threshold.
MembershipVector InferMembership(const PredictionSet& query_preds,
                                 const ThresholdSet& thresholds);

// Two-sided p-value of t = (mean - 1) / ((sd + 1e-8) / sqrt(n)) under
// Student's t with n - 1 degrees of freedom; sd uses n - 1 normalization.
// Requires n >= 2. All-ones input returns exactly 1.
absl::StatusOr<double> TTestVsOnes(const MembershipVector& m);

// Two-sample KS statistic between `m` and an all-ones vector of equal length,
// computed with the generic ECDF sweep. Equals 1 - mean(m).
double KsStatisticVsOnes(const MembershipVector& m);

// Asymptotic two-sample KS p-value for KsStatisticVsOnes.
double KsTestVsOnes(const MembershipVector& m);

absl::StatusOr<double> PValueVsOnes(const MembershipVector& m, TestKind kind);

// Verdict is kRemoved iff rho_ema <= alpha.
absl::StatusOr<AuditReport> MakeReport(const MembershipVector& m,
                                       TestKind kind, double alpha);

// InferMembership followed by the selected test.
absl::StatusOr<AuditReport> EmaScore(const PredictionSet& query_preds,
                                     const ThresholdSet& thresholds,
                                     TestKind kind, double alpha = kDefaultAlpha);

}  // namespace memaudit

#endif  // MEMAUDIT_AGGREGATION_H_
