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


#ifndef MEMAUDIT_REPORT_H_
#define MEMAUDIT_REPORT_H_

#include <array>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "memaudit/types.h"

namespace memaudit {

inline constexpr int kDefaultHistogramBins = 20;

struct HistogramBin {
  double lower = 0.0;
  double upper = 0.0;
  size_t count = 0;
};

struct MetricHistogram {
  MetricKind metric = MetricKind::kCorrectness;
  std::vector<HistogramBin> bins;
};

// Per-metric score histograms over fixed ranges: correctness uses the two
// bins [0, 0.5) and [0.5, 1]; confidence spans [0, 1]; negative entropy spans
// [-ln C, 0]. Out-of-range scores are clamped into the end bins.
std::array<MetricHistogram, 3> MetricHistograms(const PredictionSet& preds,
                                                int bins = kDefaultHistogramBins);

// Appends rows "<label>,<metric>,<lower>,<upper>,<count>".
void WriteHistogramRows(std::string_view label,
                        const std::array<MetricHistogram, 3>& histograms,
                        std::ostream& out);
inline constexpr std::string_view kHistogramCsvHeader =
    "query,metric,bin_lower,bin_upper,count";

}  // namespace memaudit

#endif  // MEMAUDIT_REPORT_H_
