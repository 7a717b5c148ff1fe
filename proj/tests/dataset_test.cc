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


#include "memaudit/dataset.h"

#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "absl/status/status.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace memaudit {
namespace {

using ::testing::ElementsAre;
using ::testing::HasSubstr;

LabeledDataset Sequential(int n, int dim, std::optional<ImageShape> shape = {}) {
  FeatureMatrix x(n, dim);
  std::vector<int> labels(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < dim; ++j) x(i, j) = i * 100 + j;
    labels[static_cast<size_t>(i)] = i % 3;
  }
  return *LabeledDataset::Create(std::move(x), std::move(labels), 3, shape);
}

TEST(LabeledDatasetTest, ValidatesInvariants) {
  FeatureMatrix x(2, 2);
  x << 1, 2, 3, 4;
  EXPECT_TRUE(LabeledDataset::Create(x, {0, 1}, 2).ok());
  EXPECT_FALSE(LabeledDataset::Create(x, {0}, 2).ok());
  EXPECT_FALSE(LabeledDataset::Create(x, {0, 2}, 2).ok());
  EXPECT_FALSE(LabeledDataset::Create(x, {0, -1}, 2).ok());
  EXPECT_FALSE(LabeledDataset::Create(x, {0, 1}, 1).ok());
  EXPECT_FALSE(LabeledDataset::Create(x, {0, 1}, 2, ImageShape{1, 3}).ok());
  EXPECT_TRUE(LabeledDataset::Create(x, {0, 1}, 2, ImageShape{1, 2}).ok());
  FeatureMatrix bad = x;
  bad(0, 0) = NAN;
  EXPECT_FALSE(LabeledDataset::Create(bad, {0, 1}, 2).ok());
  EXPECT_FALSE(LabeledDataset::Create(FeatureMatrix(0, 2), {}, 2).ok());
}

TEST(LabeledDatasetTest, SubsetAndConcatenate) {
  LabeledDataset data = Sequential(5, 2);
  const std::vector<size_t> idx = {4, 1};
  LabeledDataset sub = *data.Subset(idx);
  EXPECT_THAT(sub.labels(), ElementsAre(1, 1));
  EXPECT_EQ(sub.features()(0, 1), 401);
  const std::vector<size_t> bad = {5};
  EXPECT_EQ(data.Subset(bad).status().code(), absl::StatusCode::kOutOfRange);

  const std::vector<LabeledDataset> parts = {sub, data};
  LabeledDataset joined = *Concatenate(parts);
  EXPECT_EQ(joined.size(), 7u);
  EXPECT_EQ(joined.features()(2, 0), 0);
  const std::vector<LabeledDataset> mismatched = {data, Sequential(2, 3)};
  EXPECT_FALSE(Concatenate(mismatched).ok());
}

TEST(SeededPermutationTest, IsPermutationAndDeterministic) {
  std::vector<size_t> p = SeededPermutation(100, 4);
  EXPECT_EQ(p, SeededPermutation(100, 4));
  EXPECT_NE(p, SeededPermutation(100, 5));
  EXPECT_EQ(std::set<size_t>(p.begin(), p.end()).size(), 100u);
}

TEST(SampleWithoutReplacementTest, DistinctRows) {
  LabeledDataset data = Sequential(50, 1);
  LabeledDataset s = *SampleWithoutReplacement(data, 20, 3);
  std::set<double> seen;
  for (Eigen::Index i = 0; i < s.features().rows(); ++i) {
    EXPECT_TRUE(seen.insert(s.features()(i, 0)).second);
  }
  EXPECT_EQ(s, *SampleWithoutReplacement(data, 20, 3));
  EXPECT_FALSE(SampleWithoutReplacement(data, 51, 3).ok());
  EXPECT_FALSE(SampleWithoutReplacement(data, 0, 3).ok());
}

TEST(GenerateBlobsTest, ShapeBalanceAndMeans) {
  BlobSpec spec;
  spec.per_class = 500;
  spec.seed = 9;
  LabeledDataset data = *GenerateBlobs(spec);
  EXPECT_EQ(data.size(), 5000u);
  EXPECT_EQ(data.dim(), 20);
  EXPECT_EQ(data.num_classes(), 10);
  std::map<int, Eigen::VectorXd> sums;
  std::map<int, int> counts;
  for (size_t i = 0; i < data.size(); ++i) {
    const int y = data.labels()[i];
    if (!sums.count(y)) sums[y] = Eigen::VectorXd::Zero(20);
    sums[y] += data.features().row(static_cast<Eigen::Index>(i)).transpose();
    ++counts[y];
  }
  const Eigen::MatrixXd means = *BlobMeans(spec);
  for (int c = 0; c < 10; ++c) {
    EXPECT_EQ(counts[c], 500);
    const Eigen::VectorXd empirical = sums[c] / 500.0;
    EXPECT_LT((empirical - means.row(c).transpose()).norm(), 0.5);
  }
  // Pairwise mean distance equals the separation.
  EXPECT_NEAR((means.row(0) - means.row(1)).norm(), 3.0, 1e-12);
  EXPECT_EQ(data, *GenerateBlobs(spec));
}

TEST(GenerateBlobsTest, LowDimensionMeansHaveSameScale) {
  BlobSpec spec;
  spec.dim = 3;
  const Eigen::MatrixXd means = *BlobMeans(spec);
  for (Eigen::Index c = 0; c < means.rows(); ++c) {
    EXPECT_NEAR(means.row(c).norm(), 3.0 / std::sqrt(2.0), 1e-12);
  }
}

TEST(GenerateBlobsTest, PerturbationOffsetsEachMeanByItsNorm) {
  BlobSpec spec;
  BlobSpec shifted = spec;
  shifted.mean_perturbation = 3.0;
  shifted.perturbation_seed = 4;
  const Eigen::MatrixXd a = *BlobMeans(spec);
  const Eigen::MatrixXd b = *BlobMeans(shifted);
  for (Eigen::Index c = 0; c < a.rows(); ++c) {
    EXPECT_NEAR((b.row(c) - a.row(c)).norm(), 3.0, 1e-12);
  }
  EXPECT_GT((b.row(1) - a.row(1) - (b.row(0) - a.row(0))).norm(), 1e-3);
  shifted.perturbation_seed = 5;
  EXPECT_GT((*BlobMeans(shifted) - b).norm(), 1e-3);
}

TEST(GenerateBlobsTest, RejectsBadSpecs) {
  BlobSpec spec;
  spec.classes = 1;
  EXPECT_FALSE(GenerateBlobs(spec).ok());
  spec = BlobSpec{};
  spec.per_class = 0;
  EXPECT_FALSE(GenerateBlobs(spec).ok());
  spec = BlobSpec{};
  spec.dim = 0;
  EXPECT_FALSE(GenerateBlobs(spec).ok());
}

TEST(SplitFoldsTest, EqualDisjointCover) {
  LabeledDataset data = Sequential(20, 1);
  std::vector<LabeledDataset> folds = *SplitFolds(data, 5, 2);
  ASSERT_EQ(folds.size(), 5u);
  std::set<double> seen;
  for (const LabeledDataset& f : folds) {
    EXPECT_EQ(f.size(), 4u);
    for (Eigen::Index i = 0; i < f.features().rows(); ++i) {
      EXPECT_TRUE(seen.insert(f.features()(i, 0)).second);
    }
  }
  EXPECT_EQ(seen.size(), 20u);
  EXPECT_EQ(SplitFolds(data, 3, 2).status().code(),
            absl::StatusCode::kInvalidArgument);
  EXPECT_FALSE(SplitFolds(data, 0, 2).ok());
}

TEST(CorruptCalibrationTest, CountsFollowRoundingRule) {
  LabeledDataset data = Sequential(101, 4);
  for (int k : {100, 90, 80, 70, 60, 50, 0, 33}) {
    CorruptionSpec spec;
    spec.k = k;
    spec.seed = 1;
    CorruptedDataset out = *CorruptCalibration(data, spec);
    const size_t clean = static_cast<size_t>(std::lround(k * 101 / 100.0));
    EXPECT_EQ(out.report.clean, clean) << k;
    EXPECT_EQ(out.report.noised, (101 - clean) / 2) << k;
    EXPECT_EQ(out.report.rotated, 101 - clean - (101 - clean) / 2) << k;
    EXPECT_EQ(out.data.labels(), data.labels());
    EXPECT_EQ(out.data.size(), data.size());
    EXPECT_EQ(out.data.dim(), data.dim());
    size_t unchanged = 0;
    for (Eigen::Index i = 0; i < 101; ++i) {
      unchanged += out.data.features().row(i) == data.features().row(i) ? 1 : 0;
    }
    EXPECT_EQ(unchanged, clean) << k;
  }
}

TEST(CorruptCalibrationTest, KHundredIsIdentity) {
  LabeledDataset data = Sequential(30, 4);
  CorruptionSpec spec;
  CorruptedDataset out = *CorruptCalibration(data, spec);
  EXPECT_EQ(out.data, data);
  EXPECT_EQ(out.report.rotation_method, "none");
}

TEST(CorruptCalibrationTest, NoiseOnly) {
  LabeledDataset data = Sequential(10, 4);
  CorruptionSpec spec;
  spec.k = 50;
  spec.mode = CorruptionMode::kNoiseOnly;
  CorruptedDataset out = *CorruptCalibration(data, spec);
  EXPECT_EQ(out.report.noised, 5u);
  EXPECT_EQ(out.report.rotated, 0u);
  EXPECT_EQ(out.report.rotation_method, "none");
}

TEST(CorruptCalibrationTest, OrthogonalRotationPreservesNorms) {
  LabeledDataset data = Sequential(10, 5);
  CorruptionSpec spec;
  spec.k = 0;
  spec.seed = 4;
  CorruptedDataset out = *CorruptCalibration(data, spec);
  EXPECT_EQ(out.report.rotation_method, "orthogonal");
  EXPECT_EQ(out.report.rotated, 5u);
  size_t preserved = 0;
  for (Eigen::Index i = 0; i < 10; ++i) {
    const long norm = std::lround(out.data.features().row(i).norm() * 1e6);
    if (std::lround(data.features().row(i).norm() * 1e6) == norm) ++preserved;
  }
  EXPECT_GE(preserved, 5u);
}

TEST(CorruptCalibrationTest, GridRotationPermutesPixels) {
  LabeledDataset data = Sequential(6, 4, ImageShape{2, 2});
  CorruptionSpec spec;
  spec.k = 0;
  spec.seed = 8;
  CorruptedDataset out = *CorruptCalibration(data, spec);
  EXPECT_EQ(out.report.rotation_method, "grid");
  size_t permuted = 0;
  for (Eigen::Index i = 0; i < 6; ++i) {
    std::vector<double> a(data.features().row(i).begin(),
                          data.features().row(i).end());
    std::vector<double> b(out.data.features().row(i).begin(),
                          out.data.features().row(i).end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a == b && data.features().row(i) != out.data.features().row(i)) {
      ++permuted;
    }
  }
  EXPECT_EQ(permuted, out.report.rotated);
}

TEST(CorruptCalibrationTest, GridWithoutImageShapeIsRejected) {
  LabeledDataset data = Sequential(6, 4);
  CorruptionSpec spec;
  spec.k = 50;
  spec.rotation = RotationMethod::kGrid;
  absl::StatusOr<CorruptedDataset> out = CorruptCalibration(data, spec);
  EXPECT_EQ(out.status().code(), absl::StatusCode::kInvalidArgument);
  EXPECT_THAT(std::string(out.status().message()), HasSubstr("image shape"));
}

TEST(CorruptCalibrationTest, RejectsBadParameters) {
  LabeledDataset data = Sequential(6, 4);
  CorruptionSpec spec;
  spec.k = 101;
  EXPECT_FALSE(CorruptCalibration(data, spec).ok());
  spec.k = -1;
  EXPECT_FALSE(CorruptCalibration(data, spec).ok());
  spec.k = 50;
  spec.noise_sigma = 0.0;
  EXPECT_FALSE(CorruptCalibration(data, spec).ok());
}

TEST(CorruptCalibrationTest, Deterministic) {
  LabeledDataset data = Sequential(40, 4);
  CorruptionSpec spec;
  spec.k = 60;
  spec.seed = 77;
  EXPECT_EQ(CorruptCalibration(data, spec)->data,
            CorruptCalibration(data, spec)->data);
}

}  // namespace
}  // namespace memaudit
