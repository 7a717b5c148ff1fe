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


#include "memaudit/report.h"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "memaudit/io.h"
#include "memaudit/metrics.h"

namespace memaudit {
namespace {

MetricHistogram UniformHistogram(MetricKind metric,
                                 const std::vector<double>& scores,
                                 double lower, double upper, int bins) {
  MetricHistogram h;
  h.metric = metric;
  const double width = (upper - lower) / bins;
  for (int b = 0; b < bins; ++b) {
    h.bins.push_back({lower + b * width, b + 1 == bins ? upper : lower + (b + 1) * width, 0});
  }
  for (double s : scores) {
    int b = static_cast<int>(std::floor((s - lower) / width));
    b = std::clamp(b, 0, bins - 1);
    ++h.bins[static_cast<size_t>(b)].count;
  }
  return h;
}

}  // namespace

std::array<MetricHistogram, 3> MetricHistograms(const PredictionSet& preds,
                                                int bins) {
  bins = std::max(bins, 1);
  const double entropy_floor =
      -std::log(static_cast<double>(preds.num_classes()));
  return {
      UniformHistogram(MetricKind::kCorrectness,
                       ComputeMetric(MetricKind::kCorrectness, preds), 0.0, 1.0,
                       2),
      UniformHistogram(MetricKind::kConfidence,
                       ComputeMetric(MetricKind::kConfidence, preds), 0.0, 1.0,
                       bins),
      UniformHistogram(MetricKind::kNegativeEntropy,
                       ComputeMetric(MetricKind::kNegativeEntropy, preds),
                       entropy_floor, 0.0, bins),
  };
}

void WriteHistogramRows(std::string_view label,
                        const std::array<MetricHistogram, 3>& histograms,
                        std::ostream& out) {
  for (const MetricHistogram& h : histograms) {
    for (const HistogramBin& bin : h.bins) {
      out << label << ',' << MetricName(h.metric) << ','
          << FormatDouble(bin.lower) << ',' << FormatDouble(bin.upper) << ','
          << bin.count << '\n';
    }
  }
}

}  // namespace memaudit
