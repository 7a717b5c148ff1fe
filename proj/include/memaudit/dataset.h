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

#ifndef MEMAUDIT_DATASET_H_
#define MEMAUDIT_DATASET_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "Eigen/Core"
#include "absl/status/statusor.h"

namespace memaudit {

// n x d, one sample per row.
using FeatureMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct ImageShape {
  int height = 0;
  int width = 0;

  friend bool operator==(const ImageShape&, const ImageShape&) = default;
};

// Labeled samples. Invariants: n >= 1 rows, one label per row, every label in
// [0, num_classes), and height * width == d when an image shape is set.
class LabeledDataset {
 public:
  static absl::StatusOr<LabeledDataset> Create(
      FeatureMatrix features, std::vector<int> labels, int num_classes,
      std::optional<ImageShape> image_shape = std::nullopt);

  const FeatureMatrix& features() const { return features_; }
  const std::vector<int>& labels() const { return labels_; }
  int num_classes() const { return num_classes_; }
  const std::optional<ImageShape>& image_shape() const { return image_shape_; }
  size_t size() const { return labels_.size(); }
  int dim() const { return static_cast<int>(features_.cols()); }

  // Rows at `indices`, in that order.
  absl::StatusOr<LabeledDataset> Subset(std::span<const size_t> indices) const;

  friend bool operator==(const LabeledDataset& a, const LabeledDataset& b) {
    return a.num_classes_ == b.num_classes_ && a.labels_ == b.labels_ &&
           a.image_shape_ == b.image_shape_ && a.features_ == b.features_;
  }

 private:
  LabeledDataset(FeatureMatrix features, std::vector<int> labels,
                 int num_classes, std::optional<ImageShape> image_shape)
      : features_(std::move(features)),
        labels_(std::move(labels)),
        num_classes_(num_classes),
        image_shape_(image_shape) {}

  FeatureMatrix features_;
  std::vector<int> labels_;
  int num_classes_;
  std::optional<ImageShape> image_shape_;
};

// Row-wise concatenation. All parts must agree on dim and class count.
absl::StatusOr<LabeledDataset> Concatenate(
    std::span<const LabeledDataset> parts);

// Deterministic permutation of [0, n) under `seed`.
std::vector<size_t> SeededPermutation(size_t n, uint64_t seed);

// Draws `count` distinct row indices of `data` under `seed`.
absl::StatusOr<LabeledDataset> SampleWithoutReplacement(
    const LabeledDataset& data, size_t count, uint64_t seed);

struct BlobSpec {
  int classes = 10;
  int per_class = 200;
  int dim = 20;
  // Pairwise distance between class means.
  double separation = 3.0;
  uint64_t seed = 0;
  // Each class mean is moved by its own seeded random offset of this norm.
  // Zero gives the reference distribution; positive values a shifted one.
  double mean_perturbation = 0.0;
  uint64_t perturbation_seed = 0;
};

// Isotropic unit-variance Gaussian blobs. Class c has mean
// (separation / sqrt 2) * e_c when dim >= classes, otherwise a seeded random
// unit direction with the same scale. Rows are ordered by class and then
// shuffled under `seed`.
absl::StatusOr<LabeledDataset> GenerateBlobs(const BlobSpec& spec);

// Class means used by GenerateBlobs (classes x dim).
absl::StatusOr<Eigen::MatrixXd> BlobMeans(const BlobSpec& spec);

// Shuffles under `seed` and cuts into `folds` equal, disjoint parts.
absl::StatusOr<std::vector<LabeledDataset>> SplitFolds(
    const LabeledDataset& data, int folds, uint64_t seed);

enum class CorruptionMode { kNoiseAndRotate, kNoiseOnly };

enum class RotationMethod {
  // Grid rotation when the data carries an image shape, otherwise a seeded
  // random orthogonal transform.
  kAuto,
  // 2-D rotation of the pixel grid; requires an image shape.
  kGrid,
  kOrthogonal,
};

struct CorruptionSpec {
  // Percent of samples kept untouched, in [0, 100].
  int k = 100;
  double noise_sigma = 0.5;
  uint64_t seed = 0;
  CorruptionMode mode = CorruptionMode::kNoiseAndRotate;
  RotationMethod rotation = RotationMethod::kAuto;
};

struct CorruptionReport {
  size_t clean = 0;
  size_t noised = 0;
  size_t rotated = 0;
  // "none", "grid" or "orthogonal".
  std::string rotation_method = "none";
};

struct CorruptedDataset {
  LabeledDataset data;
  CorruptionReport report;
};

// Keeps round(k * n / 100) samples untouched. Of the rest, floor(half) get
// additive Gaussian noise and the remainder are rotated (kNoiseAndRotate), or
// all get noise (kNoiseOnly). Labels, order, n and d never change.
absl::StatusOr<CorruptedDataset> CorruptCalibration(const LabeledDataset& data,
                                                    const CorruptionSpec& spec);

}  // namespace memaudit

#endif  // MEMAUDIT_DATASET_H_
