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

#include "memaudit/io.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "absl/strings/ascii.h"
#include "absl/strings/match.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "json.hpp"

namespace memaudit {
namespace {

using nlohmann::json;

absl::Status LineError(size_t line, absl::string_view message) {
  return absl::InvalidArgumentError(absl::StrCat("line ", line, ": ", message));
}

template <typename T>
bool ParseNumber(absl::string_view text, T& value) {
  text = absl::StripAsciiWhitespace(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  return ec == std::errc() && ptr == text.data() + text.size() && !text.empty();
}

// Rows collected by either dataset parser before validation.
struct RawRows {
  std::vector<std::vector<double>> features;
  std::vector<int> labels;
  std::vector<size_t> line_numbers;
};

absl::StatusOr<LabeledDataset> BuildDataset(RawRows rows,
                                            const DatasetLoadOptions& options) {
  if (rows.labels.empty()) {
    return absl::InvalidArgumentError("dataset file has no samples");
  }
  int num_classes = 0;
  if (options.num_classes.has_value()) {
    num_classes = *options.num_classes;
    for (size_t i = 0; i < rows.labels.size(); ++i) {
      if (rows.labels[i] < 0 || rows.labels[i] >= num_classes) {
        return LineError(rows.line_numbers[i],
                         absl::StrCat("label ", rows.labels[i],
                                      " outside [0, ", num_classes, ")"));
      }
    }
  } else {
    for (size_t i = 0; i < rows.labels.size(); ++i) {
      if (rows.labels[i] < 0) {
        return LineError(rows.line_numbers[i],
                         absl::StrCat("negative label ", rows.labels[i]));
      }
    }
    num_classes =
        std::max(2, *std::max_element(rows.labels.begin(), rows.labels.end()) + 1);
  }
  const size_t dim = rows.features.front().size();
  FeatureMatrix features(static_cast<Eigen::Index>(rows.labels.size()),
                         static_cast<Eigen::Index>(dim));
  for (size_t r = 0; r < rows.features.size(); ++r) {
    for (size_t c = 0; c < dim; ++c) {
      features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          rows.features[r][c];
    }
  }
  return LabeledDataset::Create(std::move(features), std::move(rows.labels),
                                num_classes, options.image_shape);
}

absl::StatusOr<std::ifstream> OpenForRead(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  return in;
}

}  // namespace

std::string FormatDouble(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

absl::StatusOr<LabeledDataset> ParseDatasetCsv(
    std::istream& in, const DatasetLoadOptions& options) {
  std::string line;
  size_t line_number = 0;
  size_t columns = 0;
  RawRows rows;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (absl::StripAsciiWhitespace(line).empty()) continue;
    const std::vector<absl::string_view> fields = absl::StrSplit(line, ',');
    if (!have_header) {
      if (absl::StripAsciiWhitespace(fields.front()) != "label" ||
          fields.size() < 2) {
        return LineError(line_number,
                         "expected header \"label,f0,f1,...\" with at least "
                         "one feature column");
      }
      columns = fields.size();
      have_header = true;
      continue;
    }
    if (fields.size() != columns) {
      return LineError(line_number,
                       absl::StrCat("expected ", columns, " fields, got ",
                                    fields.size()));
    }
    int label = 0;
    if (!ParseNumber(fields[0], label)) {
      return LineError(line_number,
                       absl::StrCat("bad label \"", fields[0], "\""));
    }
    std::vector<double> row(columns - 1);
    for (size_t c = 1; c < columns; ++c) {
      if (!ParseNumber(fields[c], row[c - 1])) {
        return LineError(line_number, absl::StrCat("bad feature value \"",
                                                   fields[c], "\" in column ",
                                                   c));
      }
    }
    rows.labels.push_back(label);
    rows.features.push_back(std::move(row));
    rows.line_numbers.push_back(line_number);
  }
  if (!have_header) {
    return absl::InvalidArgumentError("dataset file is empty");
  }
  return BuildDataset(std::move(rows), options);
}

absl::StatusOr<LabeledDataset> ParseDatasetJsonl(
    std::istream& in, const DatasetLoadOptions& options) {
  std::string line;
  size_t line_number = 0;
  RawRows rows;
  while (std::getline(in, line)) {
    ++line_number;
    if (absl::StripAsciiWhitespace(line).empty()) continue;
    const json obj = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (!obj.is_object() || !obj.contains("label") ||
        !obj.contains("features") || !obj["label"].is_number_integer() ||
        !obj["features"].is_array()) {
      return LineError(line_number,
                       "expected {\"label\": int, \"features\": [numbers]}");
    }
    std::vector<double> row;
    for (const json& v : obj["features"]) {
      if (!v.is_number()) return LineError(line_number, "non-numeric feature");
      row.push_back(v.get<double>());
    }
    if (row.empty()) return LineError(line_number, "no features");
    if (!rows.features.empty() && row.size() != rows.features.front().size()) {
      return LineError(line_number,
                       absl::StrCat("expected ", rows.features.front().size(),
                                    " features, got ", row.size()));
    }
    rows.labels.push_back(obj["label"].get<int>());
    rows.features.push_back(std::move(row));
    rows.line_numbers.push_back(line_number);
  }
  if (rows.labels.empty()) {
    return absl::InvalidArgumentError("dataset file is empty");
  }
  return BuildDataset(std::move(rows), options);
}

absl::StatusOr<LabeledDataset> LoadDataset(const std::string& path,
                                           const DatasetLoadOptions& options) {
  absl::StatusOr<std::ifstream> in = OpenForRead(path);
  if (!in.ok()) return in.status();
  DatasetFormat format = options.format;
  if (format == DatasetFormat::kAuto) {
    format = absl::EndsWith(path, ".jsonl") || absl::EndsWith(path, ".json")
                 ? DatasetFormat::kJsonl
                 : DatasetFormat::kCsv;
  }
  absl::StatusOr<LabeledDataset> data =
      format == DatasetFormat::kJsonl ? ParseDatasetJsonl(*in, options)
                                      : ParseDatasetCsv(*in, options);
  if (!data.ok()) {
    return absl::Status(data.status().code(),
                        absl::StrCat(path, ": ", data.status().message()));
  }
  return data;
}

absl::Status WriteDatasetCsv(const LabeledDataset& data, std::ostream& out) {
  out << "label";
  for (int c = 0; c < data.dim(); ++c) out << ",f" << c;
  out << '\n';
  for (size_t r = 0; r < data.size(); ++r) {
    out << data.labels()[r];
    for (int c = 0; c < data.dim(); ++c) {
      out << ',' << FormatDouble(data.features()(static_cast<Eigen::Index>(r), c));
    }
    out << '\n';
  }
  if (!out) return absl::DataLossError("failed writing dataset CSV");
  return absl::OkStatus();
}

absl::Status SaveDatasetCsv(const LabeledDataset& data,
                            const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    return absl::NotFoundError(absl::StrCat("cannot open ", path, " for writing"));
  }
  return WriteDatasetCsv(data, out);
}

absl::StatusOr<PredictionFile> ParsePredictions(std::istream& in) {
  std::string line;
  size_t line_number = 0;
  std::optional<PredictionFileHeader> header;
  std::vector<PredictionRecord> records;
  while (std::getline(in, line)) {
    ++line_number;
    if (absl::StripAsciiWhitespace(line).empty()) continue;
    const json obj = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (!obj.is_object()) return LineError(line_number, "not a JSON object");
    if (!header.has_value()) {
      if (!obj.contains("num_classes") || !obj["num_classes"].is_number_integer() ||
          !obj.contains("producer") || !obj["producer"].is_string()) {
        return LineError(line_number,
                         "expected header {\"num_classes\": int, "
                         "\"producer\": string}");
      }
      header = PredictionFileHeader{obj["num_classes"].get<int>(),
                                    obj["producer"].get<std::string>()};
      if (header->num_classes < 2) {
        return LineError(line_number, "num_classes must be at least 2");
      }
      continue;
    }
    if (!obj.contains("label") || !obj["label"].is_number_integer() ||
        !obj.contains("probs") || !obj["probs"].is_array()) {
      return LineError(line_number,
                       "expected {\"label\": int, \"probs\": [numbers]}");
    }
    std::vector<double> probs;
    for (const json& v : obj["probs"]) {
      if (!v.is_number()) return LineError(line_number, "non-numeric probability");
      probs.push_back(v.get<double>());
    }
    if (probs.size() != static_cast<size_t>(header->num_classes)) {
      return LineError(line_number,
                       absl::StrCat("expected ", header->num_classes,
                                    " probabilities, got ", probs.size()));
    }
    absl::StatusOr<ProbabilityVector> pv =
        ProbabilityVector::Create(std::move(probs));
    if (!pv.ok()) return LineError(line_number, pv.status().message());
    absl::StatusOr<PredictionRecord> record =
        PredictionRecord::Create(*std::move(pv), obj["label"].get<int>());
    if (!record.ok()) return LineError(line_number, record.status().message());
    records.push_back(*std::move(record));
  }
  if (!header.has_value()) {
    return absl::InvalidArgumentError("prediction file is empty");
  }
  if (records.empty()) {
    return absl::InvalidArgumentError("prediction file has no records");
  }
  absl::StatusOr<PredictionSet> set = PredictionSet::Create(std::move(records));
  if (!set.ok()) return set.status();
  return PredictionFile{*std::move(header), *std::move(set)};
}

absl::StatusOr<PredictionFile> LoadPredictions(const std::string& path) {
  absl::StatusOr<std::ifstream> in = OpenForRead(path);
  if (!in.ok()) return in.status();
  absl::StatusOr<PredictionFile> file = ParsePredictions(*in);
  if (!file.ok()) {
    return absl::Status(file.status().code(),
                        absl::StrCat(path, ": ", file.status().message()));
  }
  return file;
}

absl::Status WritePredictions(const PredictionSet& preds,
                              std::string_view producer, std::ostream& out) {
  json header = {{"num_classes", preds.num_classes()},
                 {"producer", std::string(producer)}};
  out << header.dump() << '\n';
  for (const PredictionRecord& record : preds) {
    const auto probs = record.probs().values();
    json row = {{"label", record.label()},
                {"probs", std::vector<double>(probs.begin(), probs.end())}};
    out << row.dump() << '\n';
  }
  if (!out) return absl::DataLossError("failed writing predictions");
  return absl::OkStatus();
}

absl::Status SavePredictions(const PredictionSet& preds,
                             std::string_view producer,
                             const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    return absl::NotFoundError(absl::StrCat("cannot open ", path, " for writing"));
  }
  return WritePredictions(preds, producer, out);
}

}  // namespace memaudit
