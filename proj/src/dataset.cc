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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <utility>

#include "Eigen/QR"
#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace memaudit {
namespace {

// Class-mean directions for dim < classes come from this fixed stream so that
// every sampling seed draws from the same distribution.
constexpr uint64_t kMeanDirectionSeed = 0x6d656d6175646974ULL;

Eigen::VectorXd RandomUnitVector(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(dim);
  do {
    for (int i = 0; i < dim; ++i) v[i] = normal(rng);
  } while (v.norm() == 0.0);
  return v / v.norm();
}

// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the signs
// of R's diagonal folded into Q.
Eigen::MatrixXd RandomOrthogonal(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd g(dim, dim);
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) g(r, c) = normal(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int c = 0; c < dim; ++c) {
    if (r(c, c) < 0.0) q.col(c) = -q.col(c);
  }
  return q;
}

// Rotates a row-major height x width image by quarter_turns * 90 degrees
// clockwise. Odd turns require a square image.
Eigen::VectorXd RotateGrid(const Eigen::VectorXd& pixels, ImageShape shape,
                           int quarter_turns) {
  const int h = shape.height;
  const int w = shape.width;
  Eigen::VectorXd out(pixels.size());
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      int src_i = i;
      int src_j = j;
      switch (quarter_turns % 4) {
        case 1:
          src_i = h - 1 - j;
          src_j = i;
          break;
        case 2:
          src_i = h - 1 - i;
          src_j = w - 1 - j;
          break;
        case 3:
          src_i = j;
          src_j = w - 1 - i;
          break;
        default:
          break;
      }
      out[i * w + j] = pixels[src_i * w + src_j];
    }
  }
  return out;
}

}  // namespace

absl::StatusOr<LabeledDataset> LabeledDataset::Create(
    FeatureMatrix features, std::vector<int> labels, int num_classes,
    std::optional<ImageShape> image_shape) {
  if (labels.empty()) {
    return absl::InvalidArgumentError("dataset is empty");
  }
  if (static_cast<size_t>(features.rows()) != labels.size()) {
    return absl::InvalidArgumentError(
        absl::StrCat("dataset has ", features.rows(), " feature rows but ",
                     labels.size(), " labels"));
  }
  if (features.cols() < 1) {
    return absl::InvalidArgumentError("dataset has no feature columns");
  }
  if (num_classes < 2) {
    return absl::InvalidArgumentError(
        absl::StrCat("need at least 2 classes, got ", num_classes));
  }
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes) {
      return absl::InvalidArgumentError(absl::StrCat(
          "row ", i, " has label ", labels[i], " outside [0, ", num_classes,
          ")"));
    }
  }
  if (!features.allFinite()) {
    return absl::InvalidArgumentError("dataset has non-finite features");
  }
  if (image_shape.has_value() &&
      (image_shape->height < 1 || image_shape->width < 1 ||
       static_cast<int64_t>(image_shape->height) * image_shape->width !=
           features.cols())) {
    return absl::InvalidArgumentError(
        absl::StrCat("image shape ", image_shape->height, "x",
                     image_shape->width, " does not match dimension ",
                     features.cols()));
  }
  return LabeledDataset(std::move(features), std::move(labels), num_classes,
                        image_shape);
}

absl::StatusOr<LabeledDataset> LabeledDataset::Subset(
    std::span<const size_t> indices) const {
  FeatureMatrix features(static_cast<Eigen::Index>(indices.size()),
                         features_.cols());
  std::vector<int> labels;
  labels.reserve(indices.size());
  for (size_t r = 0; r < indices.size(); ++r) {
    if (indices[r] >= size()) {
      return absl::OutOfRangeError(
          absl::StrCat("row index ", indices[r], " >= ", size()));
    }
    features.row(static_cast<Eigen::Index>(r)) =
        features_.row(static_cast<Eigen::Index>(indices[r]));
    labels.push_back(labels_[indices[r]]);
  }
  return Create(std::move(features), std::move(labels), num_classes_,
                image_shape_);
}

absl::StatusOr<LabeledDataset> Concatenate(
    std::span<const LabeledDataset> parts) {
  if (parts.empty()) {
    return absl::InvalidArgumentError("nothing to concatenate");
  }
  const LabeledDataset& first = parts.front();
  Eigen::Index rows = 0;
  for (const LabeledDataset& part : parts) {
    if (part.dim() != first.dim() ||
        part.num_classes() != first.num_classes()) {
      return absl::InvalidArgumentError(
          "concatenated datasets disagree on dimension or class count");
    }
    rows += static_cast<Eigen::Index>(part.size());
  }
  FeatureMatrix features(rows, first.dim());
  std::vector<int> labels;
  labels.reserve(static_cast<size_t>(rows));
  Eigen::Index at = 0;
  for (const LabeledDataset& part : parts) {
    features.middleRows(at, part.features().rows()) = part.features();
    at += part.features().rows();
    labels.insert(labels.end(), part.labels().begin(), part.labels().end());
  }
  return LabeledDataset::Create(std::move(features), std::move(labels),
                                first.num_classes(), first.image_shape());
}

std::vector<size_t> SeededPermutation(size_t n, uint64_t seed) {
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

absl::StatusOr<LabeledDataset> SampleWithoutReplacement(
    const LabeledDataset& data, size_t count, uint64_t seed) {
  if (count == 0 || count > data.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "cannot draw ", count, " samples from ", data.size()));
  }
  std::vector<size_t> order = SeededPermutation(data.size(), seed);
  order.resize(count);
  return data.Subset(order);
}

absl::StatusOr<Eigen::MatrixXd> BlobMeans(const BlobSpec& spec) {
  if (spec.classes < 2 || spec.dim < 2) {
    return absl::InvalidArgumentError(
        absl::StrCat("blobs need classes >= 2 and dim >= 2, got ",
                     spec.classes, " and ", spec.dim));
  }
  if (spec.separation < 0.0 || spec.mean_perturbation < 0.0) {
    return absl::InvalidArgumentError(
        "separation and mean perturbation must be non-negative");
  }
  const double scale = spec.separation / std::sqrt(2.0);
  Eigen::MatrixXd means = Eigen::MatrixXd::Zero(spec.classes, spec.dim);
  if (spec.dim >= spec.classes) {
    for (int c = 0; c < spec.classes; ++c) means(c, c) = scale;
  } else {
    std::mt19937_64 rng(kMeanDirectionSeed);
    for (int c = 0; c < spec.classes; ++c) {
      means.row(c) = scale * RandomUnitVector(spec.dim, rng).transpose();
    }
  }
  if (spec.mean_perturbation > 0.0) {
    std::mt19937_64 rng(spec.perturbation_seed);
    for (int c = 0; c < spec.classes; ++c) {
      means.row(c) +=
          spec.mean_perturbation * RandomUnitVector(spec.dim, rng).transpose();
    }
  }
  return means;
}

absl::StatusOr<LabeledDataset> GenerateBlobs(const BlobSpec& spec) {
  if (spec.per_class < 1) {
    return absl::InvalidArgumentError("per_class must be at least 1");
  }
  absl::StatusOr<Eigen::MatrixXd> means = BlobMeans(spec);
  if (!means.ok()) return means.status();

  const size_t n = static_cast<size_t>(spec.classes) * spec.per_class;
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  FeatureMatrix ordered(static_cast<Eigen::Index>(n), spec.dim);
  std::vector<int> ordered_labels(n);
  Eigen::Index row = 0;
  for (int c = 0; c < spec.classes; ++c) {
    for (int s = 0; s < spec.per_class; ++s, ++row) {
      for (int j = 0; j < spec.dim; ++j) {
        ordered(row, j) = (*means)(c, j) + normal(rng);
      }
      ordered_labels[static_cast<size_t>(row)] = c;
    }
  }
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  FeatureMatrix features(static_cast<Eigen::Index>(n), spec.dim);
  std::vector<int> labels(n);
  for (size_t i = 0; i < n; ++i) {
    features.row(static_cast<Eigen::Index>(i)) =
        ordered.row(static_cast<Eigen::Index>(order[i]));
    labels[i] = ordered_labels[order[i]];
  }
  return LabeledDataset::Create(std::move(features), std::move(labels),
                                spec.classes);
}

absl::StatusOr<std::vector<LabeledDataset>> SplitFolds(
    const LabeledDataset& data, int folds, uint64_t seed) {
  if (folds < 2) {
    return absl::InvalidArgumentError(
        absl::StrCat("need at least 2 folds, got ", folds));
  }
  if (data.size() % static_cast<size_t>(folds) != 0) {
    return absl::InvalidArgumentError(
        absl::StrCat(data.size(), " samples do not divide into ", folds,
                     " equal folds"));
  }
  const size_t fold_size = data.size() / static_cast<size_t>(folds);
  const std::vector<size_t> order = SeededPermutation(data.size(), seed);
  std::vector<LabeledDataset> out;
  out.reserve(static_cast<size_t>(folds));
  for (int f = 0; f < folds; ++f) {
    std::span<const size_t> part(order.data() + f * fold_size, fold_size);
    absl::StatusOr<LabeledDataset> fold = data.Subset(part);
    if (!fold.ok()) return fold.status();
    out.push_back(*std::move(fold));
  }
  return out;
}

absl::StatusOr<CorruptedDataset> CorruptCalibration(
    const LabeledDataset& data, const CorruptionSpec& spec) {
  if (spec.k < 0 || spec.k > 100) {
    return absl::InvalidArgumentError(
        absl::StrCat("k must be a percent in [0, 100], got ", spec.k));
  }
  if (!(spec.noise_sigma > 0.0)) {
    return absl::InvalidArgumentError("noise sigma must be positive");
  }
  const bool has_image = data.image_shape().has_value();
  if (spec.mode == CorruptionMode::kNoiseAndRotate &&
      spec.rotation == RotationMethod::kGrid && !has_image) {
    return absl::InvalidArgumentError(
        "grid rotation requested but the dataset has no image shape");
  }

  const size_t n = data.size();
  // round(k * n / 100), halves rounded up.
  const size_t clean = (static_cast<size_t>(spec.k) * n + 50) / 100;
  const size_t rest = n - clean;
  const size_t noised =
      spec.mode == CorruptionMode::kNoiseOnly ? rest : rest / 2;
  const size_t rotated = rest - noised;

  CorruptionReport report;
  report.clean = clean;
  report.noised = noised;
  report.rotated = rotated;

  std::mt19937_64 rng(spec.seed);
  const std::vector<size_t> order = [&] {
    std::vector<size_t> o(n);
    std::iota(o.begin(), o.end(), size_t{0});
    std::shuffle(o.begin(), o.end(), rng);
    return o;
  }();

  const bool use_grid =
      spec.rotation == RotationMethod::kGrid ||
      (spec.rotation == RotationMethod::kAuto && has_image);
  Eigen::MatrixXd orthogonal;
  if (rotated > 0) {
    report.rotation_method = use_grid ? "grid" : "orthogonal";
    if (!use_grid) orthogonal = RandomOrthogonal(data.dim(), rng);
  }

  FeatureMatrix features = data.features();
  std::normal_distribution<double> noise(0.0, spec.noise_sigma);
  for (size_t i = clean; i < clean + noised; ++i) {
    auto row = features.row(static_cast<Eigen::Index>(order[i]));
    for (Eigen::Index j = 0; j < row.size(); ++j) row[j] += noise(rng);
  }
  if (rotated > 0) {
    const bool square = has_image && data.image_shape()->height ==
                                         data.image_shape()->width;
    std::uniform_int_distribution<int> turns(1, 3);
    for (size_t i = clean + noised; i < n; ++i) {
      const auto r = static_cast<Eigen::Index>(order[i]);
      const Eigen::VectorXd x = features.row(r).transpose();
      if (use_grid) {
        const int quarter_turns = square ? turns(rng) : 2;
        features.row(r) =
            RotateGrid(x, *data.image_shape(), quarter_turns).transpose();
      } else {
        features.row(r) = (orthogonal * x).transpose();
      }
    }
  }

  absl::StatusOr<LabeledDataset> out = LabeledDataset::Create(
      std::move(features), data.labels(), data.num_classes(),
      data.image_shape());
  if (!out.ok()) return out.status();
  return CorruptedDataset{*std::move(out), report};
}

}  // namespace memaudit
