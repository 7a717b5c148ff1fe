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


#ifndef MEMAUDIT_EXPERIMENT_H_
#define MEMAUDIT_EXPERIMENT_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "memaudit/aggregation.h"
#include "memaudit/dataset.h"
#include "memaudit/ks_baseline.h"
#include "memaudit/mlp.h"
#include "memaudit/thresholds.h"

namespace memaudit {

// Independent seed for sub-stream `stream` of `base` (splitmix64 mixing).
uint64_t DeriveSeed(uint64_t base, uint64_t stream);

// Synthetic stand-in for an image benchmark: one pool of Gaussian blobs cut
// into target-train / calibration / held-out parts, plus a same-size query
// set drawn from blobs with perturbed means.
struct ScenarioConfig {
  int classes = 10;
  int dim = 20;
  double separation = 3.0;
  int train_size = 2000;
  int folds = 5;
  int calibration_size = 1000;
  int heldout_size = 400;
  int shifted_size = 400;
  // Norm of the class-mean offset of the shifted distribution.
  double shift_magnitude = 3.0;

  absl::Status Validate() const;
};

struct Scenario {
  // Generators of the reference and shifted distributions.
  BlobSpec reference;
  BlobSpec shifted_spec;
  LabeledDataset train;
  std::vector<LabeledDataset> folds;
  LabeledDataset calibration;
  LabeledDataset heldout;
  LabeledDataset shifted;
};

absl::StatusOr<Scenario> BuildScenario(const ScenarioConfig& config,
                                       uint64_t seed);

struct QuerySet {
  std::string name;
  LabeledDataset data;
  // Ground truth: true for subsets of the target's training data.
  bool member = false;
};

// fold1..foldF, heldout, shifted.
std::vector<QuerySet> StandardQueries(const Scenario& scenario);

struct ExperimentConfig {
  uint64_t seed = 0;
  ScenarioConfig scenario;
  // input_dim and num_classes are taken from the scenario; the seed is
  // derived per model.
  MlpConfig model;
  std::vector<int> k_values = {100, 90, 80, 70, 60, 50};
  std::vector<TestKind> test_kinds = {TestKind::kTTest, TestKind::kKsTest};
  double alpha = kDefaultAlpha;
  double calibration_fraction = kDefaultCalibrationFraction;
  double noise_sigma = 0.5;
  CorruptionMode corruption_mode = CorruptionMode::kNoiseAndRotate;
  RotationMethod rotation = RotationMethod::kAuto;
  bool run_baseline = true;
  std::vector<ProjectionMode> projection_modes = {
      kAllProjectionModes.begin(), kAllProjectionModes.end()};
  // Extra EMA passes on queries resampled to each size. Sizes up to the
  // query's own size subsample it; larger member queries draw from the whole
  // training set and larger non-member queries draw fresh samples from their
  // distribution.
  std::vector<int> query_sizes;

  absl::Status Validate() const;
};

enum class Method { kEma, kKsBaseline };

std::string_view MethodName(Method method);

struct ExperimentCell {
  Method method = Method::kEma;
  // Test kind name for EMA, projection mode name for the baseline.
  std::string variant;
  int k = 100;
  std::string query;
  size_t query_size = 0;
  // Set only for query-size ablation cells.
  std::optional<int> requested_size;
  bool member = false;
  // rho_EMA or rho_KS; empty when the cell failed.
  std::optional<double> value;
  // EMA: fraction of query samples inferred as members.
  std::optional<double> member_fraction;
  std::string error;
  double alpha = kDefaultAlpha;

  // True when a member query is judged removed/forgotten.
  bool false_positive() const;
  // True when a non-member query is judged memorized/retained.
  bool false_negative() const;
  // True when the method's decision says the query is absent from training.
  bool judged_absent() const;
};

struct QueryHistograms {
  std::string query;
  PredictionSet predictions;
};

struct ExperimentResult {
  std::vector<std::string> query_names;
  std::vector<ExperimentCell> cells;
  // Target-model outputs on each full-size query.
  std::vector<QueryHistograms> target_outputs;
  double target_train_accuracy = 0.0;
};

// Runs every (k, test kind, query) EMA cell and every (k, projection, query)
// baseline cell. Individual cell failures are recorded in the cell and do
// not stop the run.
absl::StatusOr<ExperimentResult> RunExperiment(const ExperimentConfig& config);

// Writes to `dir` (created if missing):
//   ema_ttest.csv, ema_kstest.csv           k x query tables
//   ema_<test>_q<size>.csv                  query-size ablation tables
//   ks_baseline_<projection>.csv            baseline tables
//   cells.csv                               every cell at full precision
//   metric_histograms.csv                   target-model score histograms
// Table entries use two decimals; "[FP]"/"[FN]" mark false positives and
// negatives and "ERR" marks failed cells.
absl::Status WriteExperimentOutputs(const ExperimentConfig& config,
                                    const ExperimentResult& result,
                                    const std::string& dir);

// Files written by WriteExperimentOutputs for `config`, relative to the dir.
std::vector<std::string> ExperimentOutputFiles(const ExperimentConfig& config);

}  // namespace memaudit

#endif  // MEMAUDIT_EXPERIMENT_H_
