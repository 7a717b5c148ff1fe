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


#include "memaudit/cli.h"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "json.hpp"
#include "memaudit/aggregation.h"
#include "memaudit/dataset.h"
#include "memaudit/experiment.h"
#include "memaudit/io.h"
#include "memaudit/ks_baseline.h"
#include "memaudit/mlp.h"
#include "memaudit/report.h"
#include "memaudit/thresholds.h"

namespace memaudit {
namespace {

using json = nlohmann::ordered_json;

// Seed streams derived from --seed.
constexpr uint64_t kShiftStream = 3;
constexpr uint64_t kCalibrationModelStream = 11;
constexpr uint64_t kCalibrationSplitStream = 12;
constexpr uint64_t kQueryModelStream = 13;
constexpr uint64_t kCorruptionStream = 14;

struct GlobalFlags {
  uint64_t seed = 0;
  std::string format = "text";
  std::string out_dir;
};

struct ModelFlags {
  std::vector<int> hidden = {256, 256};
  double learning_rate = 0.05;
  int epochs = 50;
  double lr_decay = 1e-4;
  int batch_size = 32;
};

struct ModelOptions {
  CLI::Option* hidden = nullptr;
  CLI::Option* learning_rate = nullptr;
  CLI::Option* epochs = nullptr;
  CLI::Option* lr_decay = nullptr;
  CLI::Option* batch_size = nullptr;
};

ModelOptions AddModelFlags(CLI::App* cmd, ModelFlags* f) {
  ModelOptions o;
  o.hidden = cmd->add_option("--hidden", f->hidden, "Hidden layer widths")
                 ->delimiter(',')
                 ->capture_default_str();
  o.learning_rate =
      cmd->add_option("--lr", f->learning_rate, "SGD learning rate")
          ->capture_default_str();
  o.epochs =
      cmd->add_option("--epochs", f->epochs, "Training epochs")->capture_default_str();
  o.lr_decay = cmd->add_option("--lr-decay", f->lr_decay,
                               "Inverse-time learning-rate decay per step")
                   ->capture_default_str();
  o.batch_size = cmd->add_option("--batch-size", f->batch_size, "Mini-batch size")
                     ->capture_default_str();
  return o;
}

MlpConfig ToMlpConfig(const ModelFlags& f, int input_dim, int num_classes,
                      uint64_t seed) {
  MlpConfig c;
  c.input_dim = input_dim;
  c.num_classes = num_classes;
  c.hidden_sizes = f.hidden;
  c.learning_rate = f.learning_rate;
  c.epochs = f.epochs;
  c.lr_decay = f.lr_decay;
  c.batch_size = f.batch_size;
  c.seed = seed;
  return c;
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

int Fail(std::ostream& err, int code, const absl::Status& status) {
  err << "error: " << status.message() << '\n';
  return code;
}

void Emit(const GlobalFlags& g, const json& j, std::ostream& out) {
  if (g.format == "json") {
    out << j.dump(2) << '\n';
    return;
  }
  for (const auto& [key, value] : j.items()) {
    if (value.is_object()) {
      for (const auto& [sub, v] : value.items()) {
        out << key << '.' << sub << ": "
            << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
      }
    } else {
      out << key << ": "
          << (value.is_string() ? value.get<std::string>() : value.dump())
          << '\n';
    }
  }
}

// Output path: the explicit flag, else <out-dir>/<default_name>.
absl::StatusOr<std::string> ResolveOutput(const std::string& flag,
                                          const GlobalFlags& g,
                                          const std::string& default_name,
                                          const std::string& flag_name) {
  std::filesystem::path path;
  if (!flag.empty()) {
    path = flag;
  } else if (!g.out_dir.empty()) {
    path = std::filesystem::path(g.out_dir) / default_name;
  } else {
    return absl::InvalidArgumentError(
        absl::StrCat("no output path: pass ", flag_name, " or --out-dir"));
  }
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) {
      return absl::InvalidArgumentError(absl::StrCat(
          "cannot create ", path.parent_path().string(), ": ", ec.message()));
    }
  }
  return path.string();
}

absl::Status WriteText(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
  if (!out) return absl::UnavailableError(absl::StrCat("failed writing ", path));
  return absl::OkStatus();
}

absl::StatusOr<ImageShape> ParseImageShape(const std::string& text) {
  int h = 0;
  int w = 0;
  char x = 0;
  std::istringstream in(text);
  if (!(in >> h >> x >> w) || (x != 'x' && x != 'X') || h < 1 || w < 1 ||
      !(in >> std::ws).eof()) {
    return absl::InvalidArgumentError(
        absl::StrCat("image shape must look like HxW, got '", text, "'"));
  }
  return ImageShape{h, w};
}

absl::StatusOr<TestKind> ParseTestKind(const std::string& s) {
  if (s == "t" || s == "t-test" || s == "ttest") return TestKind::kTTest;
  if (s == "ks" || s == "ks-test" || s == "kstest") return TestKind::kKsTest;
  return absl::InvalidArgumentError(absl::StrCat("unknown test '", s, "'"));
}

absl::StatusOr<ProjectionMode> ParseProjection(const std::string& s) {
  for (ProjectionMode mode : kAllProjectionModes) {
    if (s == ProjectionModeName(mode)) return mode;
  }
  return absl::InvalidArgumentError(absl::StrCat("unknown projection '", s, "'"));
}

absl::StatusOr<CorruptionMode> ParseCorruptionMode(const std::string& s) {
  if (s == "noise-and-rotate") return CorruptionMode::kNoiseAndRotate;
  if (s == "noise-only") return CorruptionMode::kNoiseOnly;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown corruption mode '", s, "'"));
}

absl::StatusOr<RotationMethod> ParseRotation(const std::string& s) {
  if (s == "auto") return RotationMethod::kAuto;
  if (s == "grid") return RotationMethod::kGrid;
  if (s == "orthogonal") return RotationMethod::kOrthogonal;
  return absl::InvalidArgumentError(absl::StrCat("unknown rotation '", s, "'"));
}

json ThresholdsJson(const ThresholdSet& thresholds) {
  json j = json::object();
  for (MetricKind kind : kAllMetrics) {
    j[std::string(MetricName(kind))] = {
        {"threshold", thresholds[kind].threshold},
        {"balanced_accuracy", thresholds[kind].balanced_accuracy}};
  }
  return j;
}

// synth ---------------------------------------------------------------------

struct SynthFlags {
  int classes = 10;
  int per_class = 200;
  int dim = 20;
  double separation = 3.0;
  double shift = 0.0;
  std::optional<uint64_t> shift_seed;
  std::string out;
};

int RunSynth(const SynthFlags& f, const GlobalFlags& g, std::ostream& out,
             std::ostream& err) {
  BlobSpec spec;
  spec.classes = f.classes;
  spec.per_class = f.per_class;
  spec.dim = f.dim;
  spec.separation = f.separation;
  spec.seed = g.seed;
  spec.mean_perturbation = f.shift;
  spec.perturbation_seed = f.shift_seed.value_or(DeriveSeed(g.seed, kShiftStream));
  absl::StatusOr<LabeledDataset> data = GenerateBlobs(spec);
  if (!data.ok()) return Fail(err, kExitConfigError, data.status());
  absl::StatusOr<std::string> path = ResolveOutput(f.out, g, "synth.csv", "--out");
  if (!path.ok()) return Fail(err, kExitConfigError, path.status());
  if (absl::Status s = SaveDatasetCsv(*data, *path); !s.ok()) {
    return Fail(err, kExitDataError, s);
  }
  Emit(g,
       {{"command", "synth"},
        {"path", *path},
        {"size", data->size()},
        {"dim", data->dim()},
        {"classes", data->num_classes()},
        {"shift", f.shift}},
       out);
  return kExitOk;
}

// corrupt -------------------------------------------------------------------

struct CorruptFlags {
  std::string data;
  int k = 100;
  double sigma = 0.5;
  std::string mode = "noise-and-rotate";
  std::string rotation = "auto";
  std::string image_shape;
  std::string out;
};

int RunCorrupt(const CorruptFlags& f, const GlobalFlags& g, std::ostream& out,
               std::ostream& err) {
  DatasetLoadOptions options;
  if (!f.image_shape.empty()) {
    absl::StatusOr<ImageShape> shape = ParseImageShape(f.image_shape);
    if (!shape.ok()) return Fail(err, kExitConfigError, shape.status());
    options.image_shape = *shape;
  }
  absl::StatusOr<CorruptionMode> mode = ParseCorruptionMode(f.mode);
  if (!mode.ok()) return Fail(err, kExitConfigError, mode.status());
  absl::StatusOr<RotationMethod> rotation = ParseRotation(f.rotation);
  if (!rotation.ok()) return Fail(err, kExitConfigError, rotation.status());
  absl::StatusOr<LabeledDataset> data = LoadDataset(f.data, options);
  if (!data.ok()) return Fail(err, kExitDataError, data.status());

  CorruptionSpec spec;
  spec.k = f.k;
  spec.noise_sigma = f.sigma;
  spec.seed = DeriveSeed(g.seed, kCorruptionStream);
  spec.mode = *mode;
  spec.rotation = *rotation;
  absl::StatusOr<CorruptedDataset> corrupted = CorruptCalibration(*data, spec);
  if (!corrupted.ok()) return Fail(err, kExitConfigError, corrupted.status());
  absl::StatusOr<std::string> path =
      ResolveOutput(f.out, g, "corrupted.csv", "--out");
  if (!path.ok()) return Fail(err, kExitConfigError, path.status());
  if (absl::Status s = SaveDatasetCsv(corrupted->data, *path); !s.ok()) {
    return Fail(err, kExitDataError, s);
  }
  Emit(g,
       {{"command", "corrupt"},
        {"path", *path},
        {"k", f.k},
        {"clean", corrupted->report.clean},
        {"noised", corrupted->report.noised},
        {"rotated", corrupted->report.rotated},
        {"rotation_method", corrupted->report.rotation_method}},
       out);
  return kExitOk;
}

// train ---------------------------------------------------------------------

struct TrainFlags {
  std::string data;
  std::optional<int> num_classes;
  ModelFlags model;
  std::string out;
};

int RunTrain(const TrainFlags& f, const GlobalFlags& g, std::ostream& out,
             std::ostream& err) {
  DatasetLoadOptions options;
  options.num_classes = f.num_classes;
  absl::StatusOr<LabeledDataset> data = LoadDataset(f.data, options);
  if (!data.ok()) return Fail(err, kExitDataError, data.status());
  const MlpConfig config =
      ToMlpConfig(f.model, data->dim(), data->num_classes(), g.seed);
  if (absl::Status s = config.Validate(); !s.ok()) {
    return Fail(err, kExitConfigError, s);
  }
  absl::StatusOr<std::string> path = ResolveOutput(f.out, g, "model.ckpt", "--out");
  if (!path.ok()) return Fail(err, kExitConfigError, path.status());
  absl::StatusOr<TrainedModel> model = TrainMlp(config, *data);
  if (!model.ok()) return Fail(err, kExitDataError, model.status());
  if (absl::Status s = SaveCheckpoint(*model, *path); !s.ok()) {
    return Fail(err, kExitDataError, s);
  }
  absl::StatusOr<double> acc = Accuracy(*model, *data);
  if (!acc.ok()) return Fail(err, kExitDataError, acc.status());
  const std::vector<double>& history = model->train_loss_history();
  Emit(g,
       {{"command", "train"},
        {"path", *path},
        {"samples", data->size()},
        {"parameters", model->num_parameters()},
        {"final_loss", history.empty() ? 0.0 : history.back()},
        {"train_accuracy", *acc}},
       out);
  return kExitOk;
}

// predict -------------------------------------------------------------------

struct PredictFlags {
  std::string model;
  std::string data;
  std::string producer = "memaudit";
  std::string out;
};

int RunPredict(const PredictFlags& f, const GlobalFlags& g, std::ostream& out,
               std::ostream& err) {
  absl::StatusOr<TrainedModel> model = LoadCheckpoint(f.model);
  if (!model.ok()) return Fail(err, kExitDataError, model.status());
  absl::StatusOr<LabeledDataset> data = LoadDataset(f.data);
  if (!data.ok()) return Fail(err, kExitDataError, data.status());
  const MlpConfig& config = model->config();
  if (data->dim() != config.input_dim) {
    return Fail(err, kExitModelMismatch,
                absl::InvalidArgumentError(absl::StrCat(
                    "model expects ", config.input_dim,
                    " features, dataset has ", data->dim())));
  }
  if (data->num_classes() > config.num_classes) {
    return Fail(err, kExitModelMismatch,
                absl::InvalidArgumentError(absl::StrCat(
                    "dataset has labels up to ", data->num_classes() - 1,
                    " but the model has ", config.num_classes, " classes")));
  }
  absl::StatusOr<LabeledDataset> relabeled = LabeledDataset::Create(
      data->features(), data->labels(), config.num_classes, data->image_shape());
  if (!relabeled.ok()) return Fail(err, kExitDataError, relabeled.status());
  absl::StatusOr<PredictionSet> preds = Predict(*model, *relabeled);
  if (!preds.ok()) return Fail(err, kExitModelMismatch, preds.status());
  absl::StatusOr<std::string> path =
      ResolveOutput(f.out, g, "predictions.jsonl", "--out");
  if (!path.ok()) return Fail(err, kExitConfigError, path.status());
  if (absl::Status s = SavePredictions(*preds, f.producer, *path); !s.ok()) {
    return Fail(err, kExitDataError, s);
  }
  absl::StatusOr<double> acc = Accuracy(*model, *relabeled);
  if (!acc.ok()) return Fail(err, kExitDataError, acc.status());
  Emit(g,
       {{"command", "predict"},
        {"path", *path},
        {"records", preds->size()},
        {"num_classes", preds->num_classes()},
        {"accuracy", *acc}},
       out);
  return kExitOk;
}

// audit ---------------------------------------------------------------------

struct AuditFlags {
  std::string preds;
  std::string calibration;
  std::string test = "t";
  double alpha = kDefaultAlpha;
  double cal_fraction = kDefaultCalibrationFraction;
  ModelFlags model;
};

int RunAudit(const AuditFlags& f, const GlobalFlags& g, std::ostream& out,
             std::ostream& err) {
  absl::StatusOr<TestKind> kind = ParseTestKind(f.test);
  if (!kind.ok()) return Fail(err, kExitConfigError, kind.status());
  if (!(f.alpha > 0.0 && f.alpha < 1.0)) {
    return Fail(err, kExitConfigError,
                absl::InvalidArgumentError(
                    absl::StrCat("alpha must be in (0, 1), got ", f.alpha)));
  }
  if (!(f.cal_fraction > 0.0 && f.cal_fraction < 1.0)) {
    return Fail(err, kExitConfigError,
                absl::InvalidArgumentError(absl::StrCat(
                    "calibration fraction must be in (0, 1), got ",
                    f.cal_fraction)));
  }
  absl::StatusOr<PredictionFile> preds = LoadPredictions(f.preds);
  if (!preds.ok()) return Fail(err, kExitDataError, preds.status());
  const int classes = preds->header.num_classes;
  DatasetLoadOptions options;
  options.num_classes = classes;
  absl::StatusOr<LabeledDataset> cal = LoadDataset(f.calibration, options);
  if (!cal.ok()) return Fail(err, kExitDataError, cal.status());
  const MlpConfig config = ToMlpConfig(
      f.model, cal->dim(), classes, DeriveSeed(g.seed, kCalibrationModelStream));
  if (absl::Status s = config.Validate(); !s.ok()) {
    return Fail(err, kExitConfigError, s);
  }

  const uint64_t split_seed = DeriveSeed(g.seed, kCalibrationSplitStream);
  absl::StatusOr<ThresholdInference> inference =
      InferThresholds(MakeTrainer(config), *cal, f.cal_fraction, split_seed);
  if (!inference.ok()) return Fail(err, kExitDataError, inference.status());
  absl::StatusOr<AuditReport> report =
      EmaScore(preds->predictions, inference->thresholds, *kind, f.alpha);
  if (!report.ok()) return Fail(err, kExitDataError, report.status());

  json j = {{"command", "audit"},
            {"rho_ema", report->rho_ema},
            {"verdict", std::string(VerdictName(report->verdict))},
            {"test", std::string(TestKindName(report->test_kind))},
            {"alpha", report->alpha},
            {"member_fraction", report->member_fraction},
            {"query_size", report->query_size},
            {"producer", preds->header.producer},
            {"calibration_train_size", inference->train_size},
            {"calibration_test_size", inference->test_size}};
  j["thresholds"] = ThresholdsJson(inference->thresholds);

  if (!g.out_dir.empty()) {
    absl::StatusOr<std::string> report_path =
        ResolveOutput("", g, "audit_report.json", "--out-dir");
    if (!report_path.ok()) return Fail(err, kExitConfigError, report_path.status());
    std::ostringstream hist;
    hist << kHistogramCsvHeader << '\n';
    WriteHistogramRows("query", MetricHistograms(preds->predictions), hist);
    const std::string hist_path =
        (std::filesystem::path(g.out_dir) / "audit_histograms.csv").string();
    if (absl::Status s = WriteText(*report_path, j.dump(2) + "\n"); !s.ok()) {
      return Fail(err, kExitDataError, s);
    }
    if (absl::Status s = WriteText(hist_path, hist.str()); !s.ok()) {
      return Fail(err, kExitDataError, s);
    }
  }
  Emit(g, j, out);
  return kExitOk;
}

// baseline ------------------------------------------------------------------

struct BaselineFlags {
  std::string preds;
  std::string calibration;
  std::string query;
  std::vector<std::string> projections = {"flattened", "max_prob", "true_class"};
  std::optional<uint64_t> cal_model_seed;
  std::optional<uint64_t> query_model_seed;
  ModelFlags model;
};

int RunBaseline(const BaselineFlags& f, const GlobalFlags& g, std::ostream& out,
                std::ostream& err) {
  std::vector<ProjectionMode> modes;
  for (const std::string& name : f.projections) {
    absl::StatusOr<ProjectionMode> mode = ParseProjection(name);
    if (!mode.ok()) return Fail(err, kExitConfigError, mode.status());
    modes.push_back(*mode);
  }
  absl::StatusOr<PredictionFile> preds = LoadPredictions(f.preds);
  if (!preds.ok()) return Fail(err, kExitDataError, preds.status());
  const int classes = preds->header.num_classes;
  DatasetLoadOptions options;
  options.num_classes = classes;
  absl::StatusOr<LabeledDataset> query = LoadDataset(f.query, options);
  if (!query.ok()) return Fail(err, kExitDataError, query.status());
  absl::StatusOr<LabeledDataset> cal = LoadDataset(f.calibration, options);
  if (!cal.ok()) return Fail(err, kExitDataError, cal.status());
  const PredictionSet& target = preds->predictions;
  bool labels_match = target.size() == query->size();
  for (size_t i = 0; labels_match && i < target.size(); ++i) {
    labels_match = target[i].label() == query->labels()[i];
  }
  if (!labels_match) {
    return Fail(err, kExitDataError,
                absl::InvalidArgumentError(
                    "prediction file does not match the query dataset "
                    "(sizes or labels differ)"));
  }
  if (cal->dim() != query->dim()) {
    return Fail(err, kExitModelMismatch,
                absl::InvalidArgumentError(absl::StrCat(
                    "calibration data has ", cal->dim(),
                    " features, query data has ", query->dim())));
  }
  const MlpConfig cal_config = ToMlpConfig(
      f.model, cal->dim(), classes,
      f.cal_model_seed.value_or(DeriveSeed(g.seed, kCalibrationModelStream)));
  if (absl::Status s = cal_config.Validate(); !s.ok()) {
    return Fail(err, kExitConfigError, s);
  }
  MlpConfig query_config = cal_config;
  query_config.seed =
      f.query_model_seed.value_or(DeriveSeed(g.seed, kQueryModelStream));

  absl::StatusOr<Classifier> cal_model = MakeTrainer(cal_config)(*cal);
  if (!cal_model.ok()) return Fail(err, kExitDataError, cal_model.status());
  absl::StatusOr<Classifier> query_model = MakeTrainer(query_config)(*query);
  if (!query_model.ok()) return Fail(err, kExitDataError, query_model.status());
  absl::StatusOr<PredictionSet> cal_preds = (*cal_model)(*query);
  if (!cal_preds.ok()) return Fail(err, kExitModelMismatch, cal_preds.status());
  absl::StatusOr<PredictionSet> query_preds = (*query_model)(*query);
  if (!query_preds.ok()) return Fail(err, kExitModelMismatch, query_preds.status());

  json j = {{"command", "baseline"}, {"query_size", query->size()}};
  for (ProjectionMode mode : modes) {
    absl::StatusOr<RhoKsResult> rho = RhoKs(
        ProjectOutputs(target, mode, OutputSource::kTargetOnQuery),
        ProjectOutputs(*cal_preds, mode, OutputSource::kCalibrationOnQuery),
        ProjectOutputs(*query_preds, mode, OutputSource::kQueryOnQuery));
    if (!rho.ok()) {
      return Fail(err, kExitDegenerateStatistic,
                  absl::FailedPreconditionError(
                      absl::StrCat(std::string(ProjectionModeName(mode)), ": ",
                                   rho.status().message())));
    }
    j[std::string(ProjectionModeName(mode))] = {
        {"rho_ks", rho->rho_ks},
        {"numerator", rho->numerator},
        {"denominator", rho->denominator},
        {"decision", rho->forgotten() ? "forgotten" : "retained"}};
  }
  if (!g.out_dir.empty()) {
    absl::StatusOr<std::string> path =
        ResolveOutput("", g, "baseline_report.json", "--out-dir");
    if (!path.ok()) return Fail(err, kExitConfigError, path.status());
    if (absl::Status s = WriteText(*path, j.dump(2) + "\n"); !s.ok()) {
      return Fail(err, kExitDataError, s);
    }
  }
  Emit(g, j, out);
  return kExitOk;
}

// experiment ----------------------------------------------------------------

struct ExperimentFlags {
  std::string config_path;
  std::vector<int> k_values;
  std::vector<std::string> tests;
  double alpha = kDefaultAlpha;
  std::vector<int> query_sizes;
  std::vector<std::string> projections;
  bool no_baseline = false;
  double noise_sigma = 0.5;
  std::string corruption_mode;
  ScenarioConfig scenario;
  ModelFlags model;
  ModelOptions model_options;
  std::map<std::string, CLI::Option*> options;

  bool set(const std::string& name) const {
    auto it = options.find(name);
    return it != options.end() && it->second->count() > 0;
  }
};

absl::Status ApplyModelJson(const json& j, MlpConfig* model) {
  for (const auto& [key, value] : j.items()) {
    if (key == "hidden_sizes") {
      model->hidden_sizes = value.get<std::vector<int>>();
    } else if (key == "learning_rate") {
      model->learning_rate = value.get<double>();
    } else if (key == "epochs") {
      model->epochs = value.get<int>();
    } else if (key == "lr_decay") {
      model->lr_decay = value.get<double>();
    } else if (key == "batch_size") {
      model->batch_size = value.get<int>();
    } else {
      return absl::InvalidArgumentError(
          absl::StrCat("unknown model key '", key, "'"));
    }
  }
  return absl::OkStatus();
}

absl::Status ApplyScenarioJson(const json& j, ScenarioConfig* s) {
  const std::map<std::string, int*> ints = {
      {"classes", &s->classes},
      {"dim", &s->dim},
      {"train_size", &s->train_size},
      {"folds", &s->folds},
      {"calibration_size", &s->calibration_size},
      {"heldout_size", &s->heldout_size},
      {"shifted_size", &s->shifted_size}};
  for (const auto& [key, value] : j.items()) {
    if (auto it = ints.find(key); it != ints.end()) {
      *it->second = value.get<int>();
    } else if (key == "separation") {
      s->separation = value.get<double>();
    } else if (key == "shift_magnitude") {
      s->shift_magnitude = value.get<double>();
    } else {
      return absl::InvalidArgumentError(
          absl::StrCat("unknown scenario key '", key, "'"));
    }
  }
  return absl::OkStatus();
}

absl::Status ApplyExperimentJson(const json& j, ExperimentConfig* c) {
  if (!j.is_object()) {
    return absl::InvalidArgumentError("experiment config must be a JSON object");
  }
  for (const auto& [key, value] : j.items()) {
    if (key == "seed") {
      c->seed = value.get<uint64_t>();
    } else if (key == "k_values") {
      c->k_values = value.get<std::vector<int>>();
    } else if (key == "tests") {
      c->test_kinds.clear();
      for (const std::string& t : value.get<std::vector<std::string>>()) {
        absl::StatusOr<TestKind> kind = ParseTestKind(t);
        if (!kind.ok()) return kind.status();
        c->test_kinds.push_back(*kind);
      }
    } else if (key == "alpha") {
      c->alpha = value.get<double>();
    } else if (key == "calibration_fraction") {
      c->calibration_fraction = value.get<double>();
    } else if (key == "noise_sigma") {
      c->noise_sigma = value.get<double>();
    } else if (key == "corruption_mode") {
      absl::StatusOr<CorruptionMode> mode =
          ParseCorruptionMode(value.get<std::string>());
      if (!mode.ok()) return mode.status();
      c->corruption_mode = *mode;
    } else if (key == "rotation") {
      absl::StatusOr<RotationMethod> rotation =
          ParseRotation(value.get<std::string>());
      if (!rotation.ok()) return rotation.status();
      c->rotation = *rotation;
    } else if (key == "baseline") {
      c->run_baseline = value.get<bool>();
    } else if (key == "projections") {
      c->projection_modes.clear();
      for (const std::string& p : value.get<std::vector<std::string>>()) {
        absl::StatusOr<ProjectionMode> mode = ParseProjection(p);
        if (!mode.ok()) return mode.status();
        c->projection_modes.push_back(*mode);
      }
    } else if (key == "query_sizes") {
      c->query_sizes = value.get<std::vector<int>>();
    } else if (key == "scenario") {
      if (absl::Status s = ApplyScenarioJson(value, &c->scenario); !s.ok()) {
        return s;
      }
    } else if (key == "model") {
      if (absl::Status s = ApplyModelJson(value, &c->model); !s.ok()) return s;
    } else {
      return absl::InvalidArgumentError(
          absl::StrCat("unknown experiment key '", key, "'"));
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<ExperimentConfig> BuildExperimentConfig(
    const ExperimentFlags& f, const GlobalFlags& g, bool seed_set) {
  ExperimentConfig c;
  if (!f.config_path.empty()) {
    std::ifstream in(f.config_path);
    if (!in) {
      return absl::InvalidArgumentError(
          absl::StrCat("cannot open config ", f.config_path));
    }
    try {
      const json j = json::parse(in);
      if (absl::Status s = ApplyExperimentJson(j, &c); !s.ok()) return s;
    } catch (const json::exception& e) {
      return absl::InvalidArgumentError(
          absl::StrCat("config ", f.config_path, ": ", e.what()));
    }
  }
  if (seed_set || f.config_path.empty()) c.seed = g.seed;
  if (f.set("--k")) c.k_values = f.k_values;
  if (f.set("--tests")) {
    c.test_kinds.clear();
    for (const std::string& t : f.tests) {
      absl::StatusOr<TestKind> kind = ParseTestKind(t);
      if (!kind.ok()) return kind.status();
      c.test_kinds.push_back(*kind);
    }
  }
  if (f.set("--alpha")) c.alpha = f.alpha;
  if (f.set("--query-sizes")) c.query_sizes = f.query_sizes;
  if (f.set("--projections")) {
    c.projection_modes.clear();
    for (const std::string& p : f.projections) {
      absl::StatusOr<ProjectionMode> mode = ParseProjection(p);
      if (!mode.ok()) return mode.status();
      c.projection_modes.push_back(*mode);
    }
  }
  if (f.no_baseline) c.run_baseline = false;
  if (f.set("--noise-sigma")) c.noise_sigma = f.noise_sigma;
  if (f.set("--corruption-mode")) {
    absl::StatusOr<CorruptionMode> mode = ParseCorruptionMode(f.corruption_mode);
    if (!mode.ok()) return mode.status();
    c.corruption_mode = *mode;
  }
  const std::map<std::string, std::pair<const int*, int*>> scenario_ints = {
      {"--classes", {&f.scenario.classes, &c.scenario.classes}},
      {"--dim", {&f.scenario.dim, &c.scenario.dim}},
      {"--train-size", {&f.scenario.train_size, &c.scenario.train_size}},
      {"--folds", {&f.scenario.folds, &c.scenario.folds}},
      {"--cal-size", {&f.scenario.calibration_size, &c.scenario.calibration_size}},
      {"--heldout-size", {&f.scenario.heldout_size, &c.scenario.heldout_size}},
      {"--shifted-size", {&f.scenario.shifted_size, &c.scenario.shifted_size}}};
  for (const auto& [name, ptrs] : scenario_ints) {
    if (f.set(name)) *ptrs.second = *ptrs.first;
  }
  if (f.set("--separation")) c.scenario.separation = f.scenario.separation;
  if (f.set("--shift")) c.scenario.shift_magnitude = f.scenario.shift_magnitude;
  const ModelOptions& mo = f.model_options;
  if (mo.hidden->count() > 0) c.model.hidden_sizes = f.model.hidden;
  if (mo.learning_rate->count() > 0) c.model.learning_rate = f.model.learning_rate;
  if (mo.epochs->count() > 0) c.model.epochs = f.model.epochs;
  if (mo.lr_decay->count() > 0) c.model.lr_decay = f.model.lr_decay;
  if (mo.batch_size->count() > 0) c.model.batch_size = f.model.batch_size;
  if (absl::Status s = c.Validate(); !s.ok()) return s;
  return c;
}

int RunExperimentCommand(const ExperimentFlags& f, const GlobalFlags& g,
                         bool seed_set, std::ostream& out, std::ostream& err) {
  if (g.out_dir.empty()) {
    return Fail(err, kExitConfigError,
                absl::InvalidArgumentError("experiment requires --out-dir"));
  }
  absl::StatusOr<ExperimentConfig> config = BuildExperimentConfig(f, g, seed_set);
  if (!config.ok()) return Fail(err, kExitConfigError, config.status());
  absl::StatusOr<ExperimentResult> result = RunExperiment(*config);
  if (!result.ok()) return Fail(err, kExitDataError, result.status());
  if (absl::Status s = WriteExperimentOutputs(*config, *result, g.out_dir);
      !s.ok()) {
    return Fail(err, kExitDataError, s);
  }
  size_t errors = 0;
  size_t false_positives = 0;
  size_t false_negatives = 0;
  for (const ExperimentCell& cell : result->cells) {
    if (!cell.value.has_value()) ++errors;
    if (cell.false_positive()) ++false_positives;
    if (cell.false_negative()) ++false_negatives;
  }
  json j = {{"command", "experiment"},
            {"out_dir", g.out_dir},
            {"seed", config->seed},
            {"target_train_accuracy", result->target_train_accuracy},
            {"cells", result->cells.size()},
            {"failed_cells", errors},
            {"false_positives", false_positives},
            {"false_negatives", false_negatives},
            {"files", ExperimentOutputFiles(*config)}};
  Emit(g, j, out);
  return kExitOk;
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Black-box dataset removal and memorization auditing"};
  app.name("memaudit");
  app.require_subcommand(1);
  app.fallthrough();

  GlobalFlags global;
  CLI::Option* seed_opt =
      app.add_option("--seed", global.seed, "Master random seed")
          ->capture_default_str();
  app.add_option("--format", global.format, "Output format")
      ->check(CLI::IsMember({"text", "json"}))
      ->capture_default_str();
  app.add_option("--out-dir", global.out_dir, "Directory for output files");

  SynthFlags synth;
  CLI::App* synth_cmd =
      app.add_subcommand("synth", "Generate a Gaussian-blob dataset");
  synth_cmd->add_option("--classes", synth.classes)->capture_default_str();
  synth_cmd->add_option("--per-class", synth.per_class)->capture_default_str();
  synth_cmd->add_option("--dim", synth.dim)->capture_default_str();
  synth_cmd->add_option("--separation", synth.separation)->capture_default_str();
  synth_cmd->add_option("--shift", synth.shift,
                        "Norm of the class-mean offset (0 = reference)")
      ->capture_default_str();
  synth_cmd->add_option("--shift-seed", synth.shift_seed,
                        "Seed of the mean offset direction");
  synth_cmd->add_option("--out", synth.out, "Output CSV path");

  CorruptFlags corrupt;
  CLI::App* corrupt_cmd =
      app.add_subcommand("corrupt", "Corrupt a calibration dataset");
  corrupt_cmd->add_option("--data", corrupt.data)->required();
  corrupt_cmd->add_option("--k", corrupt.k, "Percent of samples kept clean")
      ->capture_default_str();
  corrupt_cmd->add_option("--sigma", corrupt.sigma, "Noise standard deviation")
      ->capture_default_str();
  corrupt_cmd->add_option("--mode", corrupt.mode)
      ->check(CLI::IsMember({"noise-and-rotate", "noise-only"}))
      ->capture_default_str();
  corrupt_cmd->add_option("--rotation", corrupt.rotation)
      ->check(CLI::IsMember({"auto", "grid", "orthogonal"}))
      ->capture_default_str();
  corrupt_cmd->add_option("--image-shape", corrupt.image_shape,
                          "HxW pixel grid of each row");
  corrupt_cmd->add_option("--out", corrupt.out, "Output CSV path");

  TrainFlags train;
  CLI::App* train_cmd = app.add_subcommand("train", "Train an MLP classifier");
  train_cmd->add_option("--data", train.data)->required();
  train_cmd->add_option("--num-classes", train.num_classes);
  AddModelFlags(train_cmd, &train.model);
  train_cmd->add_option("--out", train.out, "Checkpoint path");

  PredictFlags predict;
  CLI::App* predict_cmd =
      app.add_subcommand("predict", "Write model outputs as JSON lines");
  predict_cmd->add_option("--model", predict.model)->required();
  predict_cmd->add_option("--data", predict.data)->required();
  predict_cmd->add_option("--producer", predict.producer)->capture_default_str();
  predict_cmd->add_option("--out", predict.out, "Prediction file path");

  AuditFlags audit;
  CLI::App* audit_cmd = app.add_subcommand(
      "audit", "Decide whether a query set was memorized or removed");
  audit_cmd->add_option("--preds", audit.preds,
                        "Target-model predictions on the query set")
      ->required();
  audit_cmd->add_option("--calibration", audit.calibration,
                        "Calibration dataset")
      ->required();
  audit_cmd->add_option("--test", audit.test)
      ->check(CLI::IsMember({"t", "ks"}))
      ->capture_default_str();
  audit_cmd->add_option("--alpha", audit.alpha)->capture_default_str();
  audit_cmd->add_option("--cal-fraction", audit.cal_fraction,
                        "Share of calibration data used to train")
      ->capture_default_str();
  AddModelFlags(audit_cmd, &audit.model);

  BaselineFlags baseline;
  CLI::App* baseline_cmd =
      app.add_subcommand("baseline", "KS-distance ratio baseline");
  baseline_cmd->add_option("--preds", baseline.preds)->required();
  baseline_cmd->add_option("--calibration", baseline.calibration)->required();
  baseline_cmd->add_option("--query", baseline.query)->required();
  baseline_cmd->add_option("--projections", baseline.projections)
      ->delimiter(',')
      ->capture_default_str();
  baseline_cmd->add_option("--cal-model-seed", baseline.cal_model_seed);
  baseline_cmd->add_option("--query-model-seed", baseline.query_model_seed);
  AddModelFlags(baseline_cmd, &baseline.model);

  ExperimentFlags experiment;
  CLI::App* experiment_cmd = app.add_subcommand(
      "experiment", "Run the synthetic audit grid and write result tables");
  auto& eo = experiment.options;
  experiment_cmd->add_option("--config", experiment.config_path,
                             "JSON experiment config");
  eo["--k"] = experiment_cmd->add_option("--k", experiment.k_values)->delimiter(',');
  eo["--tests"] = experiment_cmd->add_option("--tests", experiment.tests)
                      ->delimiter(',');
  eo["--alpha"] = experiment_cmd->add_option("--alpha", experiment.alpha);
  eo["--query-sizes"] =
      experiment_cmd->add_option("--query-sizes", experiment.query_sizes)
          ->delimiter(',');
  eo["--projections"] =
      experiment_cmd->add_option("--projections", experiment.projections)
          ->delimiter(',');
  experiment_cmd->add_flag("--no-baseline", experiment.no_baseline);
  eo["--noise-sigma"] =
      experiment_cmd->add_option("--noise-sigma", experiment.noise_sigma);
  eo["--corruption-mode"] =
      experiment_cmd->add_option("--corruption-mode", experiment.corruption_mode);
  eo["--classes"] =
      experiment_cmd->add_option("--classes", experiment.scenario.classes);
  eo["--dim"] = experiment_cmd->add_option("--dim", experiment.scenario.dim);
  eo["--separation"] =
      experiment_cmd->add_option("--separation", experiment.scenario.separation);
  eo["--train-size"] =
      experiment_cmd->add_option("--train-size", experiment.scenario.train_size);
  eo["--folds"] = experiment_cmd->add_option("--folds", experiment.scenario.folds);
  eo["--cal-size"] = experiment_cmd->add_option(
      "--cal-size", experiment.scenario.calibration_size);
  eo["--heldout-size"] = experiment_cmd->add_option(
      "--heldout-size", experiment.scenario.heldout_size);
  eo["--shifted-size"] = experiment_cmd->add_option(
      "--shifted-size", experiment.scenario.shifted_size);
  eo["--shift"] = experiment_cmd->add_option(
      "--shift", experiment.scenario.shift_magnitude);
  experiment.model_options = AddModelFlags(experiment_cmd, &experiment.model);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  if (*synth_cmd) return RunSynth(synth, global, out, err);
  if (*corrupt_cmd) return RunCorrupt(corrupt, global, out, err);
  if (*train_cmd) return RunTrain(train, global, out, err);
  if (*predict_cmd) return RunPredict(predict, global, out, err);
  if (*audit_cmd) return RunAudit(audit, global, out, err);
  if (*baseline_cmd) return RunBaseline(baseline, global, out, err);
  if (*experiment_cmd) {
    return RunExperimentCommand(experiment, global, seed_opt->count() > 0, out,
                                err);
  }
  return kExitConfigError;
}

}  // namespace memaudit
