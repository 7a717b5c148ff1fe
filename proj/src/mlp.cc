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

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numeric>
#include <random>
#include <utility>

#include "absl/strings/str_cat.h"

namespace memaudit {
namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint encoding assumes a little-endian host");

constexpr char kCheckpointMagic[8] = {'M', 'E', 'M', 'A', 'U', 'D', 'C', 'K'};
constexpr uint32_t kCheckpointVersion = 1;

std::vector<int> LayerWidths(const MlpConfig& config) {
  std::vector<int> widths;
  widths.push_back(config.input_dim);
  widths.insert(widths.end(), config.hidden_sizes.begin(),
                config.hidden_sizes.end());
  widths.push_back(config.num_classes);
  return widths;
}

// Post-activation outputs of every layer; front() is the input batch and
// back() the logits.
std::vector<Eigen::MatrixXd> Forward(const std::vector<DenseLayer>& layers,
                                     const FeatureMatrix& features) {
  std::vector<Eigen::MatrixXd> outputs;
  outputs.reserve(layers.size() + 1);
  outputs.emplace_back(features);
  for (size_t l = 0; l < layers.size(); ++l) {
    Eigen::MatrixXd z = outputs.back() * layers[l].weights;
    z.rowwise() += layers[l].bias;
    if (l + 1 < layers.size()) z = z.cwiseMax(0.0);
    outputs.push_back(std::move(z));
  }
  return outputs;
}

// Mean cross-entropy from logits via a max-shifted log-sum-exp.
double CrossEntropy(const Eigen::MatrixXd& logits,
                    std::span<const int> labels) {
  double total = 0.0;
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double m = logits.row(r).maxCoeff();
    const double lse =
        m + std::log((logits.row(r).array() - m).exp().sum());
    total += lse - logits(r, labels[static_cast<size_t>(r)]);
  }
  return total / static_cast<double>(logits.rows());
}

template <typename T>
void Put(std::string& out, T value) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  out.append(bytes, sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::string data) : data_(std::move(data)) {}

  template <typename T>
  bool Get(T& value) {
    if (pos_ + sizeof(T) > data_.size()) return false;
    std::memcpy(&value, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return true;
  }
  bool GetBytes(char* out, size_t n) {
    if (pos_ + n > data_.size()) return false;
    std::memcpy(out, data_.data() + pos_, n);
    pos_ += n;
    return true;
  }
  bool AtEnd() const { return pos_ == data_.size(); }

 private:
  std::string data_;
  size_t pos_ = 0;
};

}  // namespace

absl::Status MlpConfig::Validate() const {
  if (input_dim < 1 || num_classes < 2) {
    return absl::InvalidArgumentError(
        absl::StrCat("input_dim must be >= 1 and num_classes >= 2, got ",
                     input_dim, " and ", num_classes));
  }
  for (int h : hidden_sizes) {
    if (h < 1) {
      return absl::InvalidArgumentError(
          absl::StrCat("hidden layer size ", h, " must be >= 1"));
    }
  }
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    return absl::InvalidArgumentError("learning rate must be positive");
  }
  if (epochs < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("epochs must be >= 1, got ", epochs));
  }
  if (lr_decay < 0.0 || !std::isfinite(lr_decay)) {
    return absl::InvalidArgumentError("lr_decay must be non-negative");
  }
  if (batch_size < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("batch_size must be >= 1, got ", batch_size));
  }
  return absl::OkStatus();
}

absl::StatusOr<TrainedModel> TrainedModel::Initialize(const MlpConfig& config) {
  if (absl::Status s = config.Validate(); !s.ok()) return s;
  const std::vector<int> widths = LayerWidths(config);
  std::mt19937_64 rng(config.seed);
  std::vector<DenseLayer> layers;
  for (size_t l = 0; l + 1 < widths.size(); ++l) {
    const int fan_in = widths[l];
    const int fan_out = widths[l + 1];
    std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / fan_in));
    DenseLayer layer{Eigen::MatrixXd(fan_in, fan_out),
                     Eigen::RowVectorXd::Zero(fan_out)};
    for (int r = 0; r < fan_in; ++r) {
      for (int c = 0; c < fan_out; ++c) layer.weights(r, c) = normal(rng);
    }
    layers.push_back(std::move(layer));
  }
  return TrainedModel(config, std::move(layers), {});
}

absl::StatusOr<TrainedModel> TrainedModel::Zeros(const MlpConfig& config) {
  if (absl::Status s = config.Validate(); !s.ok()) return s;
  const std::vector<int> widths = LayerWidths(config);
  std::vector<DenseLayer> layers;
  for (size_t l = 0; l + 1 < widths.size(); ++l) {
    layers.push_back({Eigen::MatrixXd::Zero(widths[l], widths[l + 1]),
                      Eigen::RowVectorXd::Zero(widths[l + 1])});
  }
  return TrainedModel(config, std::move(layers), {});
}

absl::StatusOr<TrainedModel> TrainedModel::FromLayers(
    const MlpConfig& config, std::vector<DenseLayer> layers,
    std::vector<double> train_loss_history) {
  if (absl::Status s = config.Validate(); !s.ok()) return s;
  const std::vector<int> widths = LayerWidths(config);
  if (layers.size() + 1 != widths.size()) {
    return absl::InvalidArgumentError(
        absl::StrCat("expected ", widths.size() - 1, " layers, got ",
                     layers.size()));
  }
  for (size_t l = 0; l < layers.size(); ++l) {
    if (layers[l].weights.rows() != widths[l] ||
        layers[l].weights.cols() != widths[l + 1] ||
        layers[l].bias.size() != widths[l + 1]) {
      return absl::InvalidArgumentError(
          absl::StrCat("layer ", l, " shape does not match the config"));
    }
  }
  return TrainedModel(config, std::move(layers), std::move(train_loss_history));
}

size_t TrainedModel::num_parameters() const {
  size_t total = 0;
  for (const DenseLayer& layer : layers_) {
    total += static_cast<size_t>(layer.weights.size() + layer.bias.size());
  }
  return total;
}

Eigen::MatrixXd Softmax(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const Eigen::ArrayXd e =
        (logits.row(r).array() - logits.row(r).maxCoeff()).exp().transpose();
    out.row(r) = (e / e.sum()).transpose().matrix();
  }
  return out;
}

double ComputeLoss(const TrainedModel& model, const FeatureMatrix& features,
                   std::span<const int> labels) {
  return CrossEntropy(Forward(model.layers(), features).back(), labels);
}

LossAndGradients ComputeLossAndGradients(const TrainedModel& model,
                                         const FeatureMatrix& features,
                                         std::span<const int> labels) {
  const std::vector<DenseLayer>& layers = model.layers();
  const std::vector<Eigen::MatrixXd> outputs = Forward(layers, features);
  const Eigen::MatrixXd& logits = outputs.back();
  const double batch = static_cast<double>(features.rows());

  LossAndGradients result;
  result.loss = CrossEntropy(logits, labels);
  result.gradients.resize(layers.size());

  // d(loss)/d(logits) = (softmax - onehot) / batch.
  Eigen::MatrixXd delta = Softmax(logits);
  for (Eigen::Index r = 0; r < delta.rows(); ++r) {
    delta(r, labels[static_cast<size_t>(r)]) -= 1.0;
  }
  delta /= batch;

  for (size_t l = layers.size(); l-- > 0;) {
    const Eigen::MatrixXd& input = outputs[l];
    result.gradients[l].weights = input.transpose() * delta;
    result.gradients[l].bias = delta.colwise().sum();
    if (l > 0) {
      Eigen::MatrixXd upstream = delta * layers[l].weights.transpose();
      // ReLU passes gradient only where its output was positive.
      delta = (input.array() > 0.0).select(upstream, 0.0);
    }
  }
  return result;
}

absl::StatusOr<TrainedModel> TrainMlp(const MlpConfig& config,
                                      const LabeledDataset& data) {
  if (config.input_dim != data.dim()) {
    return absl::InvalidArgumentError(
        absl::StrCat("config expects input dimension ", config.input_dim,
                     " but the data has ", data.dim()));
  }
  if (config.num_classes != data.num_classes()) {
    return absl::InvalidArgumentError(
        absl::StrCat("config expects ", config.num_classes,
                     " classes but the data has ", data.num_classes()));
  }
  absl::StatusOr<TrainedModel> model = TrainedModel::Initialize(config);
  if (!model.ok()) return model.status();

  // Separate stream from initialization so batch order does not depend on
  // network width.
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  const size_t n = data.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  const size_t batch_size = static_cast<size_t>(config.batch_size);

  FeatureMatrix batch;
  std::vector<int> batch_labels;
  uint64_t step = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (size_t start = 0; start < n; start += batch_size) {
      const size_t count = std::min(batch_size, n - start);
      batch.resize(static_cast<Eigen::Index>(count), data.dim());
      batch_labels.resize(count);
      for (size_t i = 0; i < count; ++i) {
        batch.row(static_cast<Eigen::Index>(i)) =
            data.features().row(static_cast<Eigen::Index>(order[start + i]));
        batch_labels[i] = data.labels()[order[start + i]];
      }
      LossAndGradients lg = ComputeLossAndGradients(*model, batch, batch_labels);
      if (!std::isfinite(lg.loss)) {
        return absl::InternalError(
            absl::StrCat("training diverged: non-finite loss in epoch ",
                         epoch + 1));
      }
      epoch_loss += lg.loss * static_cast<double>(count);
      const double lr =
          config.learning_rate /
          (1.0 + config.lr_decay * static_cast<double>(step));
      std::vector<DenseLayer>& layers = model->mutable_layers();
      for (size_t l = 0; l < layers.size(); ++l) {
        layers[l].weights -= lr * lg.gradients[l].weights;
        layers[l].bias -= lr * lg.gradients[l].bias;
      }
      ++step;
    }
    model->train_loss_history_.push_back(epoch_loss / static_cast<double>(n));
  }
  return model;
}

absl::StatusOr<Eigen::MatrixXd> PredictProba(const TrainedModel& model,
                                             const FeatureMatrix& features) {
  if (features.cols() != model.config().input_dim) {
    return absl::InvalidArgumentError(
        absl::StrCat("model expects input dimension ",
                     model.config().input_dim, " but got ", features.cols()));
  }
  return Softmax(Forward(model.layers(), features).back());
}

absl::StatusOr<PredictionSet> Predict(const TrainedModel& model,
                                      const LabeledDataset& data) {
  if (data.num_classes() != model.config().num_classes) {
    return absl::InvalidArgumentError(
        absl::StrCat("model has ", model.config().num_classes,
                     " classes but the data has ", data.num_classes()));
  }
  absl::StatusOr<Eigen::MatrixXd> probs = PredictProba(model, data.features());
  if (!probs.ok()) return probs.status();
  std::vector<PredictionRecord> records;
  records.reserve(data.size());
  for (Eigen::Index r = 0; r < probs->rows(); ++r) {
    std::vector<double> row(static_cast<size_t>(probs->cols()));
    for (Eigen::Index c = 0; c < probs->cols(); ++c) row[c] = (*probs)(r, c);
    absl::StatusOr<ProbabilityVector> pv =
        ProbabilityVector::Create(std::move(row));
    if (!pv.ok()) return pv.status();
    absl::StatusOr<PredictionRecord> record = PredictionRecord::Create(
        *std::move(pv), data.labels()[static_cast<size_t>(r)]);
    if (!record.ok()) return record.status();
    records.push_back(*std::move(record));
  }
  return PredictionSet::Create(std::move(records));
}

absl::StatusOr<double> Accuracy(const TrainedModel& model,
                                const LabeledDataset& data) {
  absl::StatusOr<Eigen::MatrixXd> probs = PredictProba(model, data.features());
  if (!probs.ok()) return probs.status();
  size_t correct = 0;
  for (Eigen::Index r = 0; r < probs->rows(); ++r) {
    Eigen::Index argmax = 0;
    probs->row(r).maxCoeff(&argmax);
    if (argmax == data.labels()[static_cast<size_t>(r)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

absl::Status SaveCheckpoint(const TrainedModel& model,
                            const std::string& path) {
  const MlpConfig& config = model.config();
  std::string out(kCheckpointMagic, sizeof(kCheckpointMagic));
  Put<uint32_t>(out, kCheckpointVersion);
  Put<int32_t>(out, config.input_dim);
  Put<uint32_t>(out, static_cast<uint32_t>(config.hidden_sizes.size()));
  for (int h : config.hidden_sizes) Put<int32_t>(out, h);
  Put<int32_t>(out, config.num_classes);
  Put<double>(out, config.learning_rate);
  Put<int32_t>(out, config.epochs);
  Put<double>(out, config.lr_decay);
  Put<int32_t>(out, config.batch_size);
  Put<uint64_t>(out, config.seed);
  for (const DenseLayer& layer : model.layers()) {
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
        Put<double>(out, layer.weights(r, c));
      }
    }
    for (Eigen::Index c = 0; c < layer.bias.size(); ++c) {
      Put<double>(out, layer.bias[c]);
    }
  }
  Put<uint64_t>(out, model.train_loss_history().size());
  for (double loss : model.train_loss_history()) Put<double>(out, loss);

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) {
    return absl::NotFoundError(absl::StrCat("cannot open ", path, " for writing"));
  }
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) {
    return absl::DataLossError(absl::StrCat("failed writing ", path));
  }
  return absl::OkStatus();
}

absl::StatusOr<TrainedModel> LoadCheckpoint(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) {
    return absl::NotFoundError(absl::StrCat("cannot open checkpoint ", path));
  }
  Reader in(std::string(std::istreambuf_iterator<char>(file), {}));
  const auto truncated = [&] {
    return absl::DataLossError(absl::StrCat("checkpoint ", path, " is truncated"));
  };

  char magic[sizeof(kCheckpointMagic)];
  if (!in.GetBytes(magic, sizeof(magic)) ||
      std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    return absl::DataLossError(absl::StrCat(path, " is not a memaudit checkpoint"));
  }
  uint32_t version = 0;
  if (!in.Get(version)) return truncated();
  if (version != kCheckpointVersion) {
    return absl::DataLossError(
        absl::StrCat("unsupported checkpoint version ", version));
  }
  MlpConfig config;
  int32_t i32 = 0;
  uint32_t hidden_count = 0;
  if (!in.Get(i32)) return truncated();
  config.input_dim = i32;
  if (!in.Get(hidden_count) || hidden_count > 1024) return truncated();
  config.hidden_sizes.clear();
  for (uint32_t h = 0; h < hidden_count; ++h) {
    if (!in.Get(i32)) return truncated();
    config.hidden_sizes.push_back(i32);
  }
  if (!in.Get(i32)) return truncated();
  config.num_classes = i32;
  if (!in.Get(config.learning_rate)) return truncated();
  if (!in.Get(i32)) return truncated();
  config.epochs = i32;
  if (!in.Get(config.lr_decay)) return truncated();
  if (!in.Get(i32)) return truncated();
  config.batch_size = i32;
  if (!in.Get(config.seed)) return truncated();
  if (absl::Status s = config.Validate(); !s.ok()) {
    return absl::DataLossError(
        absl::StrCat("checkpoint config is invalid: ", s.message()));
  }

  const std::vector<int> widths = LayerWidths(config);
  std::vector<DenseLayer> layers;
  for (size_t l = 0; l + 1 < widths.size(); ++l) {
    DenseLayer layer{Eigen::MatrixXd(widths[l], widths[l + 1]),
                     Eigen::RowVectorXd(widths[l + 1])};
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
        if (!in.Get(layer.weights(r, c))) return truncated();
      }
    }
    for (Eigen::Index c = 0; c < layer.bias.size(); ++c) {
      if (!in.Get(layer.bias[c])) return truncated();
    }
    layers.push_back(std::move(layer));
  }
  uint64_t history_count = 0;
  if (!in.Get(history_count) || history_count > (1u << 24)) return truncated();
  std::vector<double> history(history_count);
  for (double& loss : history) {
    if (!in.Get(loss)) return truncated();
  }
  if (!in.AtEnd()) {
    return absl::DataLossError(
        absl::StrCat("checkpoint ", path, " has trailing bytes"));
  }
  return TrainedModel::FromLayers(config, std::move(layers), std::move(history));
}

}  // namespace memaudit
