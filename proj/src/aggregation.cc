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

#include "memaudit/aggregation.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "memaudit/metrics.h"
#include "memaudit/stats.h"

namespace memaudit {

absl::StatusOr<MembershipVector> MembershipVector::Create(
    std::vector<uint8_t> bits) {
  if (bits.empty()) {
    return absl::InvalidArgumentError("membership vector is empty");
  }
  for (size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] > 1) {
      return absl::InvalidArgumentError(
          absl::StrCat("membership bit ", i, " is ", int{bits[i]}));
    }
  }
  return MembershipVector(std::move(bits));
}

size_t MembershipVector::ones() const {
  return static_cast<size_t>(std::count(bits_.begin(), bits_.end(), 1));
}

double MembershipVector::mean() const {
  return static_cast<double>(ones()) / static_cast<double>(bits_.size());
}

std::string_view TestKindName(TestKind kind) {
  return kind == TestKind::kTTest ? "t-test" : "ks-test";
}

std::string_view VerdictName(Verdict verdict) {
  return verdict == Verdict::kMemorized ? "memorized" : "removed";
}

MembershipVector InferMembership(const PredictionSet& query_preds,
                                 const ThresholdSet& thresholds) {
  std::vector<uint8_t> bits;
  bits.reserve(query_preds.size());
  for (const PredictionRecord& record : query_preds) {
    bool member = false;
    for (MetricKind kind : kAllMetrics) {
      if (EvaluateMetric(kind, record) >= thresholds.threshold(kind)) {
        member = true;
        break;
      }
    }
    bits.push_back(member ? 1 : 0);
  }
  // PredictionSet is never empty, so the vector is valid.
  return *MembershipVector::Create(std::move(bits));
}

absl::StatusOr<double> TTestVsOnes(const MembershipVector& m) {
  const size_t n = m.size();
  if (n < 2) {
    return absl::InvalidArgumentError(
        absl::StrCat("t-test needs at least 2 samples, got ", n));
  }
  const double mean = m.mean();
  double sum_sq = 0.0;
  for (uint8_t bit : m.bits()) {
    const double d = bit - mean;
    sum_sq += d * d;
  }
  const double sd = std::sqrt(sum_sq / static_cast<double>(n - 1));
  const double t =
      (mean - 1.0) / ((sd + kTTestEpsilon) / std::sqrt(static_cast<double>(n)));
  return StudentTTwoSidedPValue(t, static_cast<double>(n - 1));
}

double KsStatisticVsOnes(const MembershipVector& m) {
  std::vector<double> sample(m.bits().begin(), m.bits().end());
  const std::vector<double> ones(m.size(), 1.0);
  return KsTwoSampleStatistic(sample, ones);
}

double KsTestVsOnes(const MembershipVector& m) {
  return KsTwoSamplePValue(KsStatisticVsOnes(m), m.size(), m.size());
}

absl::StatusOr<double> PValueVsOnes(const MembershipVector& m, TestKind kind) {
  if (kind == TestKind::kKsTest) return KsTestVsOnes(m);
  return TTestVsOnes(m);
}

absl::StatusOr<AuditReport> MakeReport(const MembershipVector& m,
                                       TestKind kind, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("alpha must be in (0, 1), got ", alpha));
  }
  absl::StatusOr<double> p = PValueVsOnes(m, kind);
  if (!p.ok()) return p.status();
  AuditReport report;
  report.rho_ema = *p;
  report.test_kind = kind;
  report.alpha = alpha;
  report.verdict = *p <= alpha ? Verdict::kRemoved : Verdict::kMemorized;
  report.member_fraction = m.mean();
  report.query_size = m.size();
  return report;
}

absl::StatusOr<AuditReport> EmaScore(const PredictionSet& query_preds,
                                     const ThresholdSet& thresholds,
                                     TestKind kind, double alpha) {
  return MakeReport(InferMembership(query_preds, thresholds), kind, alpha);
}

}  // namespace memaudit
