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


#include "memaudit/experiment.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "memaudit/io.h"
#include "memaudit/report.h"

namespace memaudit {
namespace {

// Seed streams.
constexpr uint64_t kPoolStream = 1;
constexpr uint64_t kShiftedSampleStream = 2;
constexpr uint64_t kShiftedMeanStream = 3;
constexpr uint64_t kFoldStream = 4;
constexpr uint64_t kTargetStream = 5;
constexpr uint64_t kCorruptionStream = 100;
constexpr uint64_t kCalibrationModelStream = 300;
constexpr uint64_t kCalibrationSplitStream = 500;
constexpr uint64_t kBaselineModelStream = 700;
constexpr uint64_t kQueryModelStream = 900;
constexpr uint64_t kResampleStream = 1 << 20;

absl::StatusOr<LabeledDataset> Head(const LabeledDataset& data, size_t begin,
                                    size_t count) {
  std::vector<size_t> idx(count);
  for (size_t i = 0; i < count; ++i) idx[i] = begin + i;
  return data.Subset(idx);
}

// Draws `count` samples of a blob distribution.
absl::StatusOr<LabeledDataset> DrawBlobs(BlobSpec spec, size_t count,
                                         uint64_t seed) {
  spec.seed = seed;
  spec.per_class = static_cast<int>(
      (count + static_cast<size_t>(spec.classes) - 1) /
      static_cast<size_t>(spec.classes));
  absl::StatusOr<LabeledDataset> pool = GenerateBlobs(spec);
  if (!pool.ok()) return pool.status();
  return Head(*pool, 0, count);
}

Trainer MakeTrainer(MlpConfig config) {
  return [config](const LabeledDataset& data) -> absl::StatusOr<Classifier> {
    absl::StatusOr<TrainedModel> model = TrainMlp(config, data);
    if (!model.ok()) return model.status();
    auto shared = std::make_shared<const TrainedModel>(*std::move(model));
    return Classifier([shared](const LabeledDataset& query) {
      return Predict(*shared, query);
    });
  };
}

std::string CsvQuote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string TableEntry(const ExperimentCell& cell) {
  if (!cell.value.has_value()) return "ERR";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", *cell.value);
  std::string entry = buf;
  if (cell.false_positive()) entry += "[FP]";
  if (cell.false_negative()) entry += "[FN]";
  return entry;
}

struct TableKey {
  Method method;
  std::string variant;
  std::optional<int> requested_size;
};

absl::Status WriteTable(const ExperimentConfig& config,
                        const ExperimentResult& result, const TableKey& key,
                        const std::filesystem::path& path) {
  std::map<std::pair<int, std::string>, const ExperimentCell*> lookup;
  for (const ExperimentCell& cell : result.cells) {
    if (cell.method == key.method && cell.variant == key.variant &&
        cell.requested_size == key.requested_size) {
      lookup[{cell.k, cell.query}] = &cell;
    }
  }
  std::ofstream out(path);
  if (!out) {
    return absl::UnavailableError(
        absl::StrCat("cannot open ", path.string(), " for writing"));
  }
  out << "k";
  for (const std::string& q : result.query_names) out << ',' << q;
  out << '\n';
  for (int k : config.k_values) {
    out << k;
    for (const std::string& q : result.query_names) {
      auto it = lookup.find({k, q});
      out << ',' << (it == lookup.end() ? "ERR" : TableEntry(*it->second));
    }
    out << '\n';
  }
  if (!out) {
    return absl::DataLossError(absl::StrCat("failed writing ", path.string()));
  }
  return absl::OkStatus();
}

std::string TableName(const TableKey& key) {
  if (key.method == Method::kKsBaseline) {
    return absl::StrCat("ks_baseline_", key.variant, ".csv");
  }
  std::string token = key.variant == TestKindName(TestKind::kTTest)
                          ? "ttest"
                          : "kstest";
  if (key.requested_size.has_value()) {
    return absl::StrCat("ema_", token, "_q", *key.requested_size, ".csv");
  }
  return absl::StrCat("ema_", token, ".csv");
}

std::vector<TableKey> TableKeys(const ExperimentConfig& config) {
  std::vector<TableKey> keys;
  for (TestKind kind : config.test_kinds) {
    keys.push_back({Method::kEma, std::string(TestKindName(kind)), std::nullopt});
  }
  for (int size : config.query_sizes) {
    for (TestKind kind : config.test_kinds) {
      keys.push_back({Method::kEma, std::string(TestKindName(kind)), size});
    }
  }
  if (config.run_baseline) {
    for (ProjectionMode mode : config.projection_modes) {
      keys.push_back(
          {Method::kKsBaseline, std::string(ProjectionModeName(mode)), std::nullopt});
    }
  }
  return keys;
}

std::string DecisionName(const ExperimentCell& cell) {
  if (!cell.value.has_value()) return "";
  if (cell.method == Method::kKsBaseline) {
    return cell.judged_absent() ? "forgotten" : "retained";
  }
  return cell.judged_absent() ? "removed" : "memorized";
}

}  // namespace

uint64_t DeriveSeed(uint64_t base, uint64_t stream) {
  uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

absl::Status ScenarioConfig::Validate() const {
  if (classes < 2) {
    return absl::InvalidArgumentError(
        absl::StrCat("classes must be >= 2, got ", classes));
  }
  if (dim < 1) {
    return absl::InvalidArgumentError(absl::StrCat("dim must be >= 1, got ", dim));
  }
  if (!(separation > 0.0) || !std::isfinite(separation)) {
    return absl::InvalidArgumentError("separation must be positive");
  }
  if (!(shift_magnitude >= 0.0) || !std::isfinite(shift_magnitude)) {
    return absl::InvalidArgumentError("shift_magnitude must be non-negative");
  }
  if (folds < 1 || train_size < folds || train_size % folds != 0) {
    return absl::InvalidArgumentError(absl::StrCat(
        "train_size ", train_size, " must be a positive multiple of folds ",
        folds));
  }
  if (calibration_size < 2 || heldout_size < 1 || shifted_size < 1) {
    return absl::InvalidArgumentError(
        "calibration_size must be >= 2 and query sizes >= 1");
  }
  return absl::OkStatus();
}

absl::StatusOr<Scenario> BuildScenario(const ScenarioConfig& config,
                                       uint64_t seed) {
  if (absl::Status s = config.Validate(); !s.ok()) return s;
  BlobSpec reference;
  reference.classes = config.classes;
  reference.dim = config.dim;
  reference.separation = config.separation;
  BlobSpec shifted_spec = reference;
  shifted_spec.mean_perturbation = config.shift_magnitude;
  shifted_spec.perturbation_seed = DeriveSeed(seed, kShiftedMeanStream);

  const size_t train_n = static_cast<size_t>(config.train_size);
  const size_t cal_n = static_cast<size_t>(config.calibration_size);
  const size_t held_n = static_cast<size_t>(config.heldout_size);
  absl::StatusOr<LabeledDataset> pool =
      DrawBlobs(reference, train_n + cal_n + held_n, DeriveSeed(seed, kPoolStream));
  if (!pool.ok()) return pool.status();
  absl::StatusOr<LabeledDataset> train = Head(*pool, 0, train_n);
  absl::StatusOr<LabeledDataset> cal = Head(*pool, train_n, cal_n);
  absl::StatusOr<LabeledDataset> held = Head(*pool, train_n + cal_n, held_n);
  absl::StatusOr<LabeledDataset> shifted =
      DrawBlobs(shifted_spec, static_cast<size_t>(config.shifted_size),
                DeriveSeed(seed, kShiftedSampleStream));
  for (const auto* part : {&train, &cal, &held, &shifted}) {
    if (!part->ok()) return part->status();
  }
  absl::StatusOr<std::vector<LabeledDataset>> folds =
      SplitFolds(*train, config.folds, DeriveSeed(seed, kFoldStream));
  if (!folds.ok()) return folds.status();
  return Scenario{reference,       shifted_spec, *std::move(train),
                  *std::move(folds), *std::move(cal), *std::move(held),
                  *std::move(shifted)};
}

std::vector<QuerySet> StandardQueries(const Scenario& scenario) {
  std::vector<QuerySet> queries;
  for (size_t f = 0; f < scenario.folds.size(); ++f) {
    queries.push_back({absl::StrCat("fold", f + 1), scenario.folds[f], true});
  }
  queries.push_back({"heldout", scenario.heldout, false});
  queries.push_back({"shifted", scenario.shifted, false});
  return queries;
}

absl::Status ExperimentConfig::Validate() const {
  if (absl::Status s = scenario.Validate(); !s.ok()) return s;
  MlpConfig m = model;
  m.input_dim = scenario.dim;
  m.num_classes = scenario.classes;
  if (absl::Status s = m.Validate(); !s.ok()) return s;
  if (k_values.empty()) return absl::InvalidArgumentError("k_values is empty");
  for (int k : k_values) {
    if (k < 0 || k > 100) {
      return absl::InvalidArgumentError(
          absl::StrCat("k must be in [0, 100], got ", k));
    }
  }
  if (test_kinds.empty()) {
    return absl::InvalidArgumentError("test_kinds is empty");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("alpha must be in (0, 1), got ", alpha));
  }
  if (!(calibration_fraction > 0.0 && calibration_fraction < 1.0)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "calibration_fraction must be in (0, 1), got ", calibration_fraction));
  }
  if (!(noise_sigma > 0.0) || !std::isfinite(noise_sigma)) {
    return absl::InvalidArgumentError("noise_sigma must be positive");
  }
  for (int size : query_sizes) {
    if (size < 2) {
      return absl::InvalidArgumentError(
          absl::StrCat("query sizes must be >= 2, got ", size));
    }
  }
  if (run_baseline && projection_modes.empty()) {
    return absl::InvalidArgumentError("projection_modes is empty");
  }
  return absl::OkStatus();
}

std::string_view MethodName(Method method) {
  return method == Method::kEma ? "ema" : "ks_baseline";
}

bool ExperimentCell::judged_absent() const {
  if (!value.has_value()) return false;
  if (method == Method::kKsBaseline) return *value >= 1.0;
  return *value <= alpha;
}

bool ExperimentCell::false_positive() const {
  return value.has_value() && member && judged_absent();
}

bool ExperimentCell::false_negative() const {
  return value.has_value() && !member && !judged_absent();
}

absl::StatusOr<ExperimentResult> RunExperiment(const ExperimentConfig& config) {
  if (absl::Status s = config.Validate(); !s.ok()) return s;
  absl::StatusOr<Scenario> scenario = BuildScenario(config.scenario, config.seed);
  if (!scenario.ok()) return scenario.status();

  MlpConfig base = config.model;
  base.input_dim = config.scenario.dim;
  base.num_classes = config.scenario.classes;
  auto with_seed = [&base](uint64_t seed) {
    MlpConfig c = base;
    c.seed = seed;
    return c;
  };

  absl::StatusOr<TrainedModel> target =
      TrainMlp(with_seed(DeriveSeed(config.seed, kTargetStream)), scenario->train);
  if (!target.ok()) return target.status();

  ExperimentResult result;
  absl::StatusOr<double> train_acc = Accuracy(*target, scenario->train);
  if (!train_acc.ok()) return train_acc.status();
  result.target_train_accuracy = *train_acc;

  const std::vector<QuerySet> queries = StandardQueries(*scenario);
  for (const QuerySet& q : queries) result.query_names.push_back(q.name);

  // Target outputs on each query, at full size and at each ablation size.
  struct Evaluated {
    const QuerySet* query;
    std::optional<int> requested_size;
    absl::StatusOr<PredictionSet> preds;
  };
  std::vector<Evaluated> evaluated;
  for (const QuerySet& q : queries) {
    evaluated.push_back({&q, std::nullopt, Predict(*target, q.data)});
    if (evaluated.back().preds.ok()) {
      result.target_outputs.push_back({q.name, *evaluated.back().preds});
    }
  }
  for (int size : config.query_sizes) {
    for (size_t i = 0; i < queries.size(); ++i) {
      const QuerySet& q = queries[i];
      const size_t n = static_cast<size_t>(size);
      const uint64_t seed =
          DeriveSeed(config.seed, kResampleStream + n * 64 + i);
      absl::StatusOr<LabeledDataset> sample;
      if (n <= q.data.size()) {
        sample = SampleWithoutReplacement(q.data, n, seed);
      } else if (q.member) {
        sample = SampleWithoutReplacement(scenario->train, n, seed);
      } else {
        sample = DrawBlobs(q.name == "shifted" ? scenario->shifted_spec
                                               : scenario->reference,
                           n, seed);
      }
      absl::StatusOr<PredictionSet> preds =
          sample.ok() ? Predict(*target, *sample)
                      : absl::StatusOr<PredictionSet>(sample.status());
      evaluated.push_back({&q, size, std::move(preds)});
    }
  }

  // Query models for the baseline do not depend on k.
  std::vector<absl::StatusOr<PredictionSet>> query_self_preds;
  std::vector<absl::StatusOr<Classifier>> query_models;
  if (config.run_baseline) {
    for (size_t i = 0; i < queries.size(); ++i) {
      Trainer trainer = MakeTrainer(
          with_seed(DeriveSeed(config.seed, kQueryModelStream + i)));
      absl::StatusOr<Classifier> model = trainer(queries[i].data);
      query_self_preds.push_back(
          model.ok() ? (*model)(queries[i].data)
                     : absl::StatusOr<PredictionSet>(model.status()));
    }
  }

  for (int k : config.k_values) {
    const uint64_t ku = static_cast<uint64_t>(k);
    CorruptionSpec corruption;
    corruption.k = k;
    corruption.noise_sigma = config.noise_sigma;
    corruption.seed = DeriveSeed(config.seed, kCorruptionStream + ku);
    corruption.mode = config.corruption_mode;
    corruption.rotation = config.rotation;
    absl::StatusOr<CorruptedDataset> corrupted =
        CorruptCalibration(scenario->calibration, corruption);

    absl::StatusOr<ThresholdInference> inference =
        corrupted.ok()
            ? InferThresholds(
                  MakeTrainer(with_seed(
                      DeriveSeed(config.seed, kCalibrationModelStream + ku))),
                  corrupted->data, config.calibration_fraction,
                  DeriveSeed(config.seed, kCalibrationSplitStream + ku))
            : absl::StatusOr<ThresholdInference>(corrupted.status());

    for (const Evaluated& e : evaluated) {
      for (TestKind kind : config.test_kinds) {
        ExperimentCell cell;
        cell.method = Method::kEma;
        cell.variant = std::string(TestKindName(kind));
        cell.k = k;
        cell.query = e.query->name;
        cell.requested_size = e.requested_size;
        cell.member = e.query->member;
        cell.alpha = config.alpha;
        absl::Status status = inference.status();
        if (status.ok()) status = e.preds.status();
        if (status.ok()) {
          cell.query_size = e.preds->size();
          absl::StatusOr<AuditReport> report =
              EmaScore(*e.preds, inference->thresholds, kind, config.alpha);
          if (report.ok()) {
            cell.value = report->rho_ema;
            cell.member_fraction = report->member_fraction;
          }
          status = report.status();
        }
        if (!status.ok()) cell.error = std::string(status.message());
        result.cells.push_back(std::move(cell));
      }
    }

    if (!config.run_baseline) continue;
    absl::StatusOr<Classifier> cal_model =
        corrupted.ok()
            ? MakeTrainer(with_seed(
                  DeriveSeed(config.seed, kBaselineModelStream + ku)))(
                  corrupted->data)
            : absl::StatusOr<Classifier>(corrupted.status());
    for (size_t i = 0; i < queries.size(); ++i) {
      const QuerySet& q = queries[i];
      absl::StatusOr<PredictionSet> cal_preds =
          cal_model.ok() ? (*cal_model)(q.data)
                         : absl::StatusOr<PredictionSet>(cal_model.status());
      for (ProjectionMode mode : config.projection_modes) {
        ExperimentCell cell;
        cell.method = Method::kKsBaseline;
        cell.variant = std::string(ProjectionModeName(mode));
        cell.k = k;
        cell.query = q.name;
        cell.query_size = q.data.size();
        cell.member = q.member;
        cell.alpha = config.alpha;
        absl::Status status = cal_preds.status();
        if (status.ok()) status = query_self_preds[i].status();
        if (status.ok()) status = evaluated[i].preds.status();
        if (status.ok()) {
          absl::StatusOr<RhoKsResult> rho = RhoKs(
              ProjectOutputs(*evaluated[i].preds, mode,
                             OutputSource::kTargetOnQuery),
              ProjectOutputs(*cal_preds, mode, OutputSource::kCalibrationOnQuery),
              ProjectOutputs(*query_self_preds[i], mode,
                             OutputSource::kQueryOnQuery));
          if (rho.ok()) cell.value = rho->rho_ks;
          status = rho.status();
        }
        if (!status.ok()) cell.error = std::string(status.message());
        result.cells.push_back(std::move(cell));
      }
    }
  }
  return result;
}

std::vector<std::string> ExperimentOutputFiles(const ExperimentConfig& config) {
  std::vector<std::string> files;
  for (const TableKey& key : TableKeys(config)) files.push_back(TableName(key));
  files.push_back("cells.csv");
  files.push_back("metric_histograms.csv");
  return files;
}

absl::Status WriteExperimentOutputs(const ExperimentConfig& config,
                                    const ExperimentResult& result,
                                    const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    return absl::UnavailableError(
        absl::StrCat("cannot create ", dir, ": ", ec.message()));
  }
  const std::filesystem::path root(dir);
  for (const TableKey& key : TableKeys(config)) {
    if (absl::Status s = WriteTable(config, result, key, root / TableName(key));
        !s.ok()) {
      return s;
    }
  }

  std::ofstream cells(root / "cells.csv");
  cells << "method,variant,k,query,member,requested_size,query_size,value,"
           "member_fraction,decision,flag,error\n";
  for (const ExperimentCell& c : result.cells) {
    cells << MethodName(c.method) << ',' << c.variant << ',' << c.k << ','
          << c.query << ',' << (c.member ? 1 : 0) << ','
          << (c.requested_size ? std::to_string(*c.requested_size) : "") << ','
          << c.query_size << ','
          << (c.value ? FormatDouble(*c.value) : "") << ','
          << (c.member_fraction ? FormatDouble(*c.member_fraction) : "") << ','
          << DecisionName(c) << ','
          << (c.false_positive() ? "FP" : c.false_negative() ? "FN" : "")
          << ',' << CsvQuote(c.error) << '\n';
  }
  if (!cells) return absl::DataLossError("failed writing cells.csv");

  std::ofstream hist(root / "metric_histograms.csv");
  hist << kHistogramCsvHeader << '\n';
  for (const QueryHistograms& q : result.target_outputs) {
    WriteHistogramRows(q.query, MetricHistograms(q.predictions), hist);
  }
  if (!hist) return absl::DataLossError("failed writing metric_histograms.csv");
  return absl::OkStatus();
}

}  // namespace memaudit
