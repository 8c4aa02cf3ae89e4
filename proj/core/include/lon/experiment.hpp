// Copyright 2026 The LON Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lon/analysis.hpp"
#include "lon/config.hpp"
#include "lon/datasets.hpp"
#include "lon/layers.hpp"
#include "lon/train.hpp"

namespace lon {

enum class Task {
  Grad2Regression,
  AreaRegression,
  PerimeterRegression,
  AreaClassification,
  PerimeterClassification,
};

enum class Generator { Blobs, Ellipses, Digits, Mnist };

struct DatasetSpec {
  Generator generator = Generator::Blobs;
  std::optional<std::uint64_t> seed;  // defaults to the experiment seed
  int train = 1500;
  int validation = 300;
  int test = 1000;
  double noise_sigma = 0.0;
  EllipseConstraint constraint = EllipseConstraint::ConstantArea;
  double constraint_value = 2000.0;
  double min_axis_ratio = 0.25;
  std::filesystem::path idx_path;  // mnist only
  double target_sigma = 1.0;       // grad^2 derivative scale
  // Regression targets are multiplied by this before training; 0 picks
  // 1e-3 for area and 1e-2 for perimeter.
  double target_scale = 0.0;
};

// One declarative training run.  See configs/*.ini for the file form.
struct ExperimentConfig {
  Task task = Task::Grad2Regression;
  std::uint64_t seed = 0;
  int epochs = 10;
  int batch_size = 32;
  std::vector<double> learning_rates{0.005};
  int eval_every = 1;
  NetworkSpec model;
  DatasetSpec dataset;

  std::uint64_t dataset_seed() const { return dataset.seed.value_or(seed); }
  double target_scale() const;
  LossKind loss() const;
  bool classification() const;
  // Throws ArgumentError on inconsistent settings.
  void validate() const;
};

ExperimentConfig config_from_ini(const IniDocument& doc);
IniDocument config_to_ini(const ExperimentConfig& config);
ExperimentConfig load_config(const std::filesystem::path& path);
// Digest of the canonical form of config_to_ini(config); stable across
// machines and independent of comments, key order, and defaults spelled out.
std::string config_hash(const ExperimentConfig& config);

std::string_view to_string(Task task);
std::string_view to_string(Generator generator);

// ---- data ------------------------------------------------------------------

struct DatasetSplits {
  std::vector<DatasetRecord> train;
  std::vector<DatasetRecord> validation;
  std::vector<DatasetRecord> test;
};

DatasetSplits make_dataset(const ExperimentConfig& config);
DatasetSplits load_dataset(const std::filesystem::path& dir);
std::vector<Example> to_examples(const ExperimentConfig& config,
                                 std::span<const DatasetRecord> records);

// ---- commands --------------------------------------------------------------

// Writes <out>/{train,validation,test}/manifest.csv plus rasters and a copy
// of the canonical config.
DatasetSplits cmd_generate(const ExperimentConfig& config, const std::filesystem::path& out);

struct LrRun {
  double lr = 0.0;
  std::filesystem::path directory;
  bool diverged = false;
  std::string message;
  double final_train_loss = 0.0;
  double final_validation_loss = 0.0;
  std::optional<double> final_validation_accuracy;
};

struct RunReport {
  std::string config_hash;
  Task task = Task::Grad2Regression;
  ParamCounts params;
  std::vector<LrRun> runs;
  std::optional<std::size_t> best;  // index into runs
  double wall_seconds = 0.0;
  std::filesystem::path checkpoint;  // best run
};

// One run per learning rate under <out>/lr_<value>/ (metrics.csv,
// checkpoint.lonc); the best run by validation metric is copied to
// <out>/best.lonc and summarized in <out>/report.json.
RunReport cmd_train(const ExperimentConfig& config, const DatasetSplits& data,
                    const std::filesystem::path& out);
void write_report(const RunReport& report, const std::filesystem::path& path);

struct EvalSummary {
  std::string split;
  std::size_t samples = 0;
  ParamCounts params;
  double loss = 0.0;
  std::optional<double> accuracy;
};

// Writes <out>/eval_<split>.csv (one row) and <out>/predictions_<split>.csv
// (one row per sample).
EvalSummary cmd_eval(const ExperimentConfig& config, const Network& net,
                     std::span<const DatasetRecord> records, const std::string& split,
                     const std::filesystem::path& out);

struct SaliencyRow {
  std::string file;
  std::optional<int> predicted;
  std::optional<int> truth;
  double boundary_mass = 0.0;
};

// Saliency maps for the records named in `ids` (file names of `records`):
// <stem>.saliency.lonr, <stem>.saliency.pgm, normalization.csv and
// boundary_mass.csv under `out`.  Throws ArgumentError naming an unknown id.
std::vector<SaliencyRow> cmd_saliency(const ExperimentConfig& config, const Network& net,
                                      std::span<const DatasetRecord> records,
                                      std::span<const std::string> ids, const std::string& model_id,
                                      const std::filesystem::path& out);

struct GradcheckCase {
  std::string name;
  GradcheckReport report;
};

// Every architecture variant at 5x5.  When `corrupt` is set, the analytic
// gradient is perturbed (negative control) and every case must fail.
std::vector<GradcheckCase> gradcheck_suite(std::uint64_t seed, double step = 1e-5,
                                           double tolerance = 1e-5, bool corrupt = false);
void write_gradcheck_csv(std::span<const GradcheckCase> cases, const std::filesystem::path& path,
                         const std::string& config_hash);

// Header line written at the top of every CSV artifact.
std::string hash_comment(const std::string& config_hash);

}  // namespace lon
