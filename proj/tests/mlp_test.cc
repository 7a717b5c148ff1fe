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


#include "memaudit/mlp.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "memaudit/dataset.h"

namespace memaudit {
namespace {

using ::testing::DoubleNear;

MlpConfig SmallConfig() {
  MlpConfig c;
  c.input_dim = 4;
  c.hidden_sizes = {16};
  c.num_classes = 3;
  c.epochs = 20;
  c.batch_size = 8;
  c.learning_rate = 0.1;
  c.seed = 5;
  return c;
}

LabeledDataset SmallBlobs(uint64_t seed) {
  BlobSpec spec;
  spec.classes = 3;
  spec.per_class = 30;
  spec.dim = 4;
  spec.separation = 6.0;
  spec.seed = seed;
  return *GenerateBlobs(spec);
}

std::string TempPath(const std::string& name) {
  return (std::filesystem::temp_directory_path() /
          ("memaudit_mlp_test_" + name))
      .string();
}

TEST(MlpConfigTest, Validate) {
  EXPECT_TRUE(SmallConfig().Validate().ok());
  auto bad = [](auto mutate) {
    MlpConfig c = SmallConfig();
    mutate(c);
    return c.Validate().code();
  };
  const auto kInvalid = absl::StatusCode::kInvalidArgument;
  EXPECT_EQ(bad([](MlpConfig& c) { c.input_dim = 0; }), kInvalid);
  EXPECT_EQ(bad([](MlpConfig& c) { c.num_classes = 1; }), kInvalid);
  EXPECT_EQ(bad([](MlpConfig& c) { c.hidden_sizes = {4, 0}; }), kInvalid);
  EXPECT_EQ(bad([](MlpConfig& c) { c.learning_rate = 0.0; }), kInvalid);
  EXPECT_EQ(bad([](MlpConfig& c) { c.epochs = 0; }), kInvalid);
  EXPECT_EQ(bad([](MlpConfig& c) { c.lr_decay = -1.0; }), kInvalid);
  EXPECT_EQ(bad([](MlpConfig& c) { c.batch_size = 0; }), kInvalid);
  MlpConfig no_hidden = SmallConfig();
  no_hidden.hidden_sizes.clear();
  EXPECT_TRUE(no_hidden.Validate().ok());
}

TEST(SoftmaxTest, RowsSumToOneAndShiftInvariant) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal(0.0, 10.0);
  Eigen::MatrixXd logits(10000, 7);
  for (Eigen::Index i = 0; i < logits.size(); ++i) logits.data()[i] = normal(rng);
  const Eigen::MatrixXd p = Softmax(logits);
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    ASSERT_NEAR(p.row(i).sum(), 1.0, 1e-12);
    ASSERT_GE(p.row(i).minCoeff(), 0.0);
  }
  const Eigen::MatrixXd shifted =
      Softmax((logits.array() + 123.0).matrix());
  EXPECT_LT((shifted - p).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SoftmaxTest, ExtremeLogitsStayFinite) {
  Eigen::MatrixXd logits(2, 3);
  logits << 1000.0, -1000.0, 0.0, -800.0, -800.0, -800.0;
  const Eigen::MatrixXd p = Softmax(logits);
  EXPECT_TRUE(p.allFinite());
  EXPECT_DOUBLE_EQ(p(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(p(1, 2), 1.0 / 3.0);
}

TEST(GradientTest, MatchesCentralDifferences) {
  MlpConfig config;
  config.input_dim = 3;
  config.hidden_sizes = {5, 4};
  config.num_classes = 3;
  config.seed = 17;
  TrainedModel model = *TrainedModel::Initialize(config);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (DenseLayer& layer : model.mutable_layers()) {
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) {
      layer.bias(i) = 0.1 * normal(rng);
    }
  }
  FeatureMatrix x(6, 3);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
  const std::vector<int> labels = {0, 1, 2, 2, 1, 0};

  const LossAndGradients analytic = ComputeLossAndGradients(model, x, labels);
  EXPECT_DOUBLE_EQ(analytic.loss, ComputeLoss(model, x, labels));
  const double h = 1e-5;
  double diff_sq = 0.0;
  double norm_sq = 0.0;
  for (size_t l = 0; l < model.layers().size(); ++l) {
    auto check = [&](double& param, double grad) {
      const double saved = param;
      param = saved + h;
      const double up = ComputeLoss(model, x, labels);
      param = saved - h;
      const double down = ComputeLoss(model, x, labels);
      param = saved;
      const double numeric = (up - down) / (2 * h);
      EXPECT_LE(std::fabs(numeric - grad),
                1e-4 * std::max({std::fabs(numeric), std::fabs(grad), 1e-3}));
      diff_sq += (numeric - grad) * (numeric - grad);
      norm_sq += (numeric + grad) * (numeric + grad) / 4;
    };
    DenseLayer& layer = model.mutable_layers()[l];
    const DenseLayer& grad = analytic.gradients[l];
    for (Eigen::Index i = 0; i < layer.weights.size(); ++i) {
      check(layer.weights.data()[i], grad.weights.data()[i]);
    }
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) {
      check(layer.bias.data()[i], grad.bias.data()[i]);
    }
  }
  EXPECT_LE(std::sqrt(diff_sq / norm_sq), 1e-6);
}

TEST(TrainMlpTest, LearnsSeparableData) {
  LabeledDataset data = SmallBlobs(1);
  absl::StatusOr<TrainedModel> model = TrainMlp(SmallConfig(), data);
  ASSERT_TRUE(model.ok()) << model.status();
  const std::vector<double>& loss = model->train_loss_history();
  ASSERT_EQ(loss.size(), 20u);
  EXPECT_LT(loss.back(), loss.front());
  EXPECT_GE(*Accuracy(*model, data), 0.95);
}

TEST(TrainMlpTest, DeterministicUnderSeed) {
  LabeledDataset data = SmallBlobs(2);
  TrainedModel a = *TrainMlp(SmallConfig(), data);
  TrainedModel b = *TrainMlp(SmallConfig(), data);
  EXPECT_EQ(a, b);
  MlpConfig other = SmallConfig();
  other.seed = 6;
  EXPECT_FALSE(a == *TrainMlp(other, data));
}

TEST(TrainMlpTest, RejectsMismatchedData) {
  LabeledDataset data = SmallBlobs(3);
  MlpConfig c = SmallConfig();
  c.input_dim = 5;
  EXPECT_EQ(TrainMlp(c, data).status().code(),
            absl::StatusCode::kInvalidArgument);
  c = SmallConfig();
  c.num_classes = 4;
  EXPECT_EQ(TrainMlp(c, data).status().code(),
            absl::StatusCode::kInvalidArgument);
  c = SmallConfig();
  c.epochs = 0;
  EXPECT_EQ(TrainMlp(c, data).status().code(),
            absl::StatusCode::kInvalidArgument);
}

TEST(TrainMlpTest, DivergenceIsReported) {
  LabeledDataset data = SmallBlobs(4);
  MlpConfig c = SmallConfig();
  c.learning_rate = 1e200;
  absl::StatusOr<TrainedModel> model = TrainMlp(c, data);
  EXPECT_EQ(model.status().code(), absl::StatusCode::kInternal);
}

TEST(PredictTest, ZeroModelIsUniform) {
  TrainedModel model = *TrainedModel::Zeros(SmallConfig());
  LabeledDataset data = SmallBlobs(5);
  absl::StatusOr<PredictionSet> preds = Predict(model, data);
  ASSERT_TRUE(preds.ok());
  ASSERT_EQ(preds->size(), data.size());
  for (const PredictionRecord& r : *preds) {
    for (double p : r.probs().values()) EXPECT_DOUBLE_EQ(p, 1.0 / 3.0);
  }
}

TEST(PredictTest, DimensionMismatch) {
  TrainedModel model = *TrainedModel::Zeros(SmallConfig());
  FeatureMatrix x(2, 5);
  x.setZero();
  EXPECT_EQ(PredictProba(model, x).status().code(),
            absl::StatusCode::kInvalidArgument);
}

TEST(PredictTest, RowsAreDistributions) {
  TrainedModel model = *TrainMlp(SmallConfig(), SmallBlobs(6));
  absl::StatusOr<Eigen::MatrixXd> p = PredictProba(model, SmallBlobs(7).features());
  ASSERT_TRUE(p.ok());
  for (Eigen::Index i = 0; i < p->rows(); ++i) {
    EXPECT_THAT(p->row(i).sum(), DoubleNear(1.0, 1e-12));
  }
}

TEST(TrainedModelTest, ShapesAndParameterCount) {
  TrainedModel model = *TrainedModel::Initialize(SmallConfig());
  ASSERT_EQ(model.layers().size(), 2u);
  EXPECT_EQ(model.layers()[0].weights.rows(), 4);
  EXPECT_EQ(model.layers()[0].weights.cols(), 16);
  EXPECT_EQ(model.layers()[1].weights.cols(), 3);
  EXPECT_EQ(model.num_parameters(), 4u * 16 + 16 + 16 * 3 + 3);
  std::vector<DenseLayer> layers = model.layers();
  layers[1].bias.resize(2);
  EXPECT_FALSE(TrainedModel::FromLayers(SmallConfig(), layers).ok());
  EXPECT_TRUE(TrainedModel::FromLayers(SmallConfig(), model.layers()).ok());
}

TEST(CheckpointTest, RoundTripIsBitExact) {
  TrainedModel model = *TrainMlp(SmallConfig(), SmallBlobs(8));
  const std::string path = TempPath("roundtrip.ckpt");
  ASSERT_TRUE(SaveCheckpoint(model, path).ok());
  absl::StatusOr<TrainedModel> loaded = LoadCheckpoint(path);
  ASSERT_TRUE(loaded.ok()) << loaded.status();
  EXPECT_EQ(*loaded, model);
  std::filesystem::remove(path);
}

TEST(CheckpointTest, RejectsBadFiles) {
  EXPECT_EQ(LoadCheckpoint(TempPath("missing.ckpt")).status().code(),
            absl::StatusCode::kNotFound);
  const std::string garbage = TempPath("garbage.ckpt");
  std::ofstream(garbage) << "not a checkpoint at all";
  EXPECT_EQ(LoadCheckpoint(garbage).status().code(),
            absl::StatusCode::kDataLoss);
  TrainedModel model = *TrainedModel::Initialize(SmallConfig());
  const std::string truncated = TempPath("truncated.ckpt");
  ASSERT_TRUE(SaveCheckpoint(model, truncated).ok());
  std::filesystem::resize_file(truncated,
                               std::filesystem::file_size(truncated) / 2);
  EXPECT_EQ(LoadCheckpoint(truncated).status().code(),
            absl::StatusCode::kDataLoss);
  std::filesystem::remove(garbage);
  std::filesystem::remove(truncated);
}

}  // namespace
}  // namespace memaudit
