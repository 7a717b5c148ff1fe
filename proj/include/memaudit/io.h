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

#ifndef MEMAUDIT_IO_H_
#define MEMAUDIT_IO_H_

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "memaudit/dataset.h"
#include "memaudit/types.h"

namespace memaudit {

// Shortest decimal string that parses back to the same double.
std::string FormatDouble(double value);

// Datasets on disk:
//   CSV:   header "label,f0,f1,...", then one row per sample.
//   JSONL: one {"label": int, "features": [numbers]} object per line.
enum class DatasetFormat { kAuto, kCsv, kJsonl };

struct DatasetLoadOptions {
  // kAuto picks by extension: ".jsonl"/".json" -> JSONL, anything else CSV.
  DatasetFormat format = DatasetFormat::kAuto;
  // When unset, the class count is max(label) + 1 (at least 2).
  std::optional<int> num_classes;
  std::optional<ImageShape> image_shape;
};

// Errors name the offending line (1-based, header included).
absl::StatusOr<LabeledDataset> LoadDataset(const std::string& path,
                                           const DatasetLoadOptions& options = {});
absl::StatusOr<LabeledDataset> ParseDatasetCsv(std::istream& in,
                                               const DatasetLoadOptions& options = {});
absl::StatusOr<LabeledDataset> ParseDatasetJsonl(
    std::istream& in, const DatasetLoadOptions& options = {});

absl::Status WriteDatasetCsv(const LabeledDataset& data, std::ostream& out);
absl::Status SaveDatasetCsv(const LabeledDataset& data, const std::string& path);

// Prediction interchange (JSON lines):
//   {"num_classes": C, "producer": "..."}        <- required header
//   {"label": int, "probs": [p_0, ..., p_{C-1}]} <- one per record
// Each probability row must sum to 1 within kProbabilitySumTolerance.
struct PredictionFileHeader {
  int num_classes = 0;
  std::string producer;
};

struct PredictionFile {
  PredictionFileHeader header;
  PredictionSet predictions;
};

absl::StatusOr<PredictionFile> ParsePredictions(std::istream& in);
absl::StatusOr<PredictionFile> LoadPredictions(const std::string& path);

absl::Status WritePredictions(const PredictionSet& preds,
                              std::string_view producer, std::ostream& out);
absl::Status SavePredictions(const PredictionSet& preds,
                             std::string_view producer, const std::string& path);

}  // namespace memaudit

#endif  // MEMAUDIT_IO_H_
