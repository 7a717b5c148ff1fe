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

#ifndef MEMAUDIT_MLP_H_
#define MEMAUDIT_MLP_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "Eigen/Core"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "memaudit/dataset.h"
#include "memaudit/types.h"

namespace memaudit {

// Fully connected ReLU network with a softmax output, trained by mini-batch
// SGD on cross-entropy.
struct MlpConfig {
  int input_dim = 0;
  std::vector<int> hidden_sizes = {256, 256};
  int num_classes = 0;
  double learning_rate = 0.05;
  int epochs = 50;
  // Inverse-time decay per optimizer step: lr / (1 + lr_decay * step).
  double lr_decay = 1e-4;
  int batch_size = 32;
  uint64_t seed = 0;

  absl::Status Validate() const;

  friend bool operator==(const MlpConfig&, const MlpConfig&) = default;
};

// weights is fan_in x fan_out so a batch propagates as X * W + b.
struct DenseLayer {
  Eigen::MatrixXd weights;
  Eigen::RowVectorXd bias;

  friend bool operator==(const DenseLayer& a, const DenseLayer& b) {
    return a.weights == b.weights && a.bias == b.bias;
  }
};

class TrainedModel {
 public:
  // He-initialized network drawn from config.seed.
  static absl::StatusOr<TrainedModel> Initialize(const MlpConfig& config);
  // Network with every weight and bias set to zero.
  static absl::StatusOr<TrainedModel> Zeros(const MlpConfig& config);
  // Validates layer shapes against `config`.
  static absl::StatusOr<TrainedModel> FromLayers(
      const MlpConfig& config, std::vector<DenseLayer> layers,
      std::vector<double> train_loss_history = {});

  const MlpConfig& config() const { return config_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& mutable_layers() { return layers_; }
  // Mean training cross-entropy per epoch.
  const std::vector<double>& train_loss_history() const {
    return train_loss_history_;
  }
  size_t num_parameters() const;

  friend bool operator==(const TrainedModel&, const TrainedModel&) = default;

 private:
  TrainedModel(MlpConfig config, std::vector<DenseLayer> layers,
               std::vector<double> history)
      : config_(std::move(config)),
        layers_(std::move(layers)),
        train_loss_history_(std::move(history)) {}

  friend absl::StatusOr<TrainedModel> TrainMlp(const MlpConfig&,
                                               const LabeledDataset&);

  MlpConfig config_;
  std::vector<DenseLayer> layers_;
  std::vector<double> train_loss_history_;
};

// Row-wise softmax, shifted by the row maximum.
Eigen::MatrixXd Softmax(const Eigen::MatrixXd& logits);

// Deterministic: identical (config, data) yields bit-identical weights.
// Fails on dimension mismatch or when the loss becomes non-finite.
absl::StatusOr<TrainedModel> TrainMlp(const MlpConfig& config,
                                      const LabeledDataset& data);

// One probability row per input row.
absl::StatusOr<Eigen::MatrixXd> PredictProba(const TrainedModel& model,
                                             const FeatureMatrix& features);

// PredictProba with the dataset's labels attached.
absl::StatusOr<PredictionSet> Predict(const TrainedModel& model,
                                      const LabeledDataset& data);

// Fraction of rows whose arg-max class equals the label.
absl::StatusOr<double> Accuracy(const TrainedModel& model,
                                const LabeledDataset& data);

struct LossAndGradients {
  double loss = 0.0;
  // Same shapes as the model's layers.
  std::vector<DenseLayer> gradients;
};

// Mean cross-entropy over the batch and its gradient by backpropagation.
LossAndGradients ComputeLossAndGradients(const TrainedModel& model,
                                         const FeatureMatrix& features,
                                         std::span<const int> labels);

// Mean cross-entropy only (forward pass).
double ComputeLoss(const TrainedModel& model, const FeatureMatrix& features,
                   std::span<const int> labels);

// Versioned little-endian binary container; loading restores every weight
// bit-exactly.
absl::Status SaveCheckpoint(const TrainedModel& model, const std::string& path);
absl::StatusOr<TrainedModel> LoadCheckpoint(const std::string& path);

}  // namespace memaudit

#endif  // MEMAUDIT_MLP_H_
