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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "oracles.h"

namespace memaudit {
namespace {

using ::memaudit::testing::MakePredictions;
using ::testing::HasSubstr;
using ::testing::StartsWith;

std::string TempPath(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("memaudit_io_test_" + name))
      .string();
}

TEST(FormatDoubleTest, RoundTrips) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> dist(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = dist(rng) * std::pow(10.0, i % 30 - 15);
    EXPECT_EQ(std::stod(FormatDouble(v)), v);
  }
  EXPECT_EQ(FormatDouble(0.5), "0.5");
  EXPECT_EQ(FormatDouble(1.0), "1");
}

TEST(DatasetCsvTest, ParsesAndInfersClasses) {
  std::istringstream in("label,f0,f1\n0,1.5,2\n2,-3,4e-2\n");
  absl::StatusOr<LabeledDataset> data = ParseDatasetCsv(in);
  ASSERT_TRUE(data.ok()) << data.status();
  EXPECT_EQ(data->size(), 2u);
  EXPECT_EQ(data->dim(), 2);
  EXPECT_EQ(data->num_classes(), 3);
  EXPECT_EQ(data->features()(1, 1), 0.04);
}

TEST(DatasetCsvTest, ErrorsNameTheLine) {
  struct Case {
    std::string text;
    std::string message;
  };
  const std::vector<Case> cases = {
      {"label,f0\n0,1\n1,x\n", "line 3"},
      {"label,f0\n0,1\n1,2,3\n", "line 3"},
      {"label,f0\n-1,1\n", "line 2"},
      {"label,f0\n0.5,1\n", "line 2"},
      {"", "empty"},
  };
  for (const Case& c : cases) {
    std::istringstream in(c.text);
    absl::StatusOr<LabeledDataset> data = ParseDatasetCsv(in);
    EXPECT_EQ(data.status().code(), absl::StatusCode::kInvalidArgument)
        << c.text;
    EXPECT_THAT(std::string(data.status().message()), HasSubstr(c.message))
        << c.text;
  }
}

TEST(DatasetCsvTest, RejectsLabelsBeyondDeclaredClasses) {
  std::istringstream in("label,f0\n0,1\n3,1\n");
  DatasetLoadOptions options;
  options.num_classes = 3;
  absl::StatusOr<LabeledDataset> data = ParseDatasetCsv(in, options);
  EXPECT_THAT(std::string(data.status().message()), StartsWith("line 3"));
}

TEST(DatasetCsvTest, RoundTripIsExact) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> normal(0.0, 1.0);
  FeatureMatrix x(30, 4);
  std::vector<int> labels(30);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
  for (size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % 4);
  LabeledDataset data = *LabeledDataset::Create(x, labels, 4);
  const std::string path = TempPath("roundtrip.csv");
  ASSERT_TRUE(SaveDatasetCsv(data, path).ok());
  absl::StatusOr<LabeledDataset> loaded = LoadDataset(path);
  ASSERT_TRUE(loaded.ok()) << loaded.status();
  EXPECT_EQ(*loaded, data);
  std::filesystem::remove(path);
}

TEST(DatasetJsonlTest, ParsesByExtension) {
  const std::string path = TempPath("data.jsonl");
  std::ofstream(path) << "{\"label\": 1, \"features\": [0.5, 2]}\n"
                         "{\"label\": 0, \"features\": [1, -1]}\n";
  absl::StatusOr<LabeledDataset> data = LoadDataset(path);
  ASSERT_TRUE(data.ok()) << data.status();
  EXPECT_EQ(data->size(), 2u);
  EXPECT_EQ(data->features()(0, 0), 0.5);
  std::istringstream bad("{\"label\": 1, \"features\": [0.5]}\n{\"label\": 0}\n");
  EXPECT_THAT(std::string(ParseDatasetJsonl(bad).status().message()),
              StartsWith("line 2"));
  std::filesystem::remove(path);
}

TEST(LoadDatasetTest, MissingFileIsNotFound) {
  EXPECT_EQ(LoadDataset(TempPath("nope.csv")).status().code(),
            absl::StatusCode::kNotFound);
}

TEST(PredictionsTest, RoundTripIsExact) {
  std::mt19937_64 rng(3);
  std::gamma_distribution<double> gamma(0.5, 1.0);
  std::vector<std::vector<double>> probs;
  std::vector<int> labels;
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> p(5);
    double sum = 0.0;
    for (double& v : p) sum += (v = gamma(rng));
    for (double& v : p) v /= sum;
    probs.push_back(p);
    labels.push_back(i % 5);
  }
  PredictionSet preds = MakePredictions(probs, labels);
  std::stringstream buffer;
  ASSERT_TRUE(WritePredictions(preds, "unit-test", buffer).ok());
  absl::StatusOr<PredictionFile> file = ParsePredictions(buffer);
  ASSERT_TRUE(file.ok()) << file.status();
  EXPECT_EQ(file->header.num_classes, 5);
  EXPECT_EQ(file->header.producer, "unit-test");
  EXPECT_EQ(file->predictions, preds);
}

TEST(PredictionsTest, HeaderIsFirstLine) {
  PredictionSet preds = MakePredictions({{0.25, 0.75}}, {1});
  std::stringstream buffer;
  ASSERT_TRUE(WritePredictions(preds, "p", buffer).ok());
  std::string first;
  std::getline(buffer, first);
  EXPECT_THAT(first, HasSubstr("\"num_classes\":2"));
  EXPECT_THAT(first, HasSubstr("\"producer\":\"p\""));
}

TEST(PredictionsTest, MalformedRowsNameTheLine) {
  const std::string header = "{\"num_classes\": 2, \"producer\": \"x\"}\n";
  const std::string good = "{\"label\": 0, \"probs\": [0.5, 0.5]}\n";
  const std::vector<std::string> bad_rows = {
      "{\"label\": 0, \"probs\": [0.5, 0.6]}\n",
      "{\"label\": 2, \"probs\": [0.5, 0.5]}\n",
      "{\"label\": 0, \"probs\": [0.2, 0.3, 0.5]}\n",
      "{\"label\": 0}\n",
      "not json\n",
  };
  for (const std::string& row : bad_rows) {
    std::istringstream in(header + good + row);
    absl::StatusOr<PredictionFile> file = ParsePredictions(in);
    EXPECT_EQ(file.status().code(), absl::StatusCode::kInvalidArgument) << row;
    EXPECT_THAT(std::string(file.status().message()), StartsWith("line 3"))
        << row;
  }
  std::istringstream no_header(good);
  EXPECT_THAT(std::string(ParsePredictions(no_header).status().message()),
              StartsWith("line 1"));
  std::istringstream no_records(header);
  EXPECT_FALSE(ParsePredictions(no_records).ok());
}

TEST(PredictionsTest, SumToleranceBoundary) {
  const std::string header = "{\"num_classes\": 2, \"producer\": \"x\"}\n";
  std::istringstream within(header +
                            "{\"label\": 0, \"probs\": [0.5, 0.5000009]}\n");
  EXPECT_TRUE(ParsePredictions(within).ok());
  std::istringstream beyond(header +
                            "{\"label\": 0, \"probs\": [0.5, 0.500002]}\n");
  EXPECT_FALSE(ParsePredictions(beyond).ok());
}

}  // namespace
}  // namespace memaudit
