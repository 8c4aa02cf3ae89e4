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

#include "lon/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "lon/errors.hpp"
#include "lon/raster_io.hpp"

namespace lon {

namespace {

template <typename Enum>
struct Named {
  std::string_view name;
  Enum value;
};

constexpr Named<Task> kTasks[] = {
    {"grad2_regression", Task::Grad2Regression},
    {"area_regression", Task::AreaRegression},
    {"perimeter_regression", Task::PerimeterRegression},
    {"area_classification", Task::AreaClassification},
    {"perimeter_classification", Task::PerimeterClassification},
};
constexpr Named<Generator> kGenerators[] = {
    {"blobs", Generator::Blobs},
    {"ellipses", Generator::Ellipses},
    {"digits", Generator::Digits},
    {"mnist", Generator::Mnist},
};
constexpr Named<EllipseConstraint> kConstraints[] = {
    {"constant_area", EllipseConstraint::ConstantArea},
    {"constant_perimeter", EllipseConstraint::ConstantPerimeter},
};
constexpr Named<ModelKind> kModels[] = {{"lon", ModelKind::Lon}, {"cnn", ModelKind::Cnn}};
constexpr Named<HeadKind> kHeads[] = {{"dense", HeadKind::Dense},
                                      {"one_by_one", HeadKind::OneByOne}};
constexpr Named<Pooling> kPoolings[] = {{"none", Pooling::None}, {"mean", Pooling::Mean}};
constexpr Named<BoundaryMode> kBoundaries[] = {{"reflect", BoundaryMode::Reflect},
                                               {"zero_pad", BoundaryMode::ZeroPad}};

template <typename Enum, std::size_t K>
Enum lookup(const Named<Enum> (&table)[K], std::string_view key, std::string_view text) {
  for (const auto& n : table) {
    if (n.name == text) return n.value;
  }
  throw ArgumentError("unknown value '" + std::string(text) + "' for " + std::string(key));
}

template <typename Enum, std::size_t K>
std::string_view name_of(const Named<Enum> (&table)[K], Enum value) {
  for (const auto& n : table) {
    if (n.value == value) return n.name;
  }
  return "?";
}

// Reads typed values out of one section and rejects unknown keys.
class SectionReader {
 public:
  SectionReader(const IniDocument& doc, std::string name) : name_(std::move(name)) {
    if (const auto it = doc.find(name_); it != doc.end()) section_ = &it->second;
  }

  const std::string* raw(const std::string& key) {
    used_.push_back(key);
    if (!section_) return nullptr;
    const auto it = section_->find(key);
    return it == section_->end() ? nullptr : &it->second;
  }

  void string(const std::string& key, std::string& out) {
    if (const auto* v = raw(key)) out = *v;
  }

  void real(const std::string& key, double& out) {
    if (const auto* v = raw(key)) out = to_real(key, *v);
  }

  template <typename Int>
  void integer(const std::string& key, Int& out) {
    if (const auto* v = raw(key)) {
      std::size_t used = 0;
      long long parsed = 0;
      try {
        parsed = std::stoll(*v, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != v->size() || v->empty()) fail(key, *v, "an integer");
      out = static_cast<Int>(parsed);
    }
  }

  void boolean(const std::string& key, bool& out) {
    if (const auto* v = raw(key)) {
      if (*v == "true") {
        out = true;
      } else if (*v == "false") {
        out = false;
      } else {
        fail(key, *v, "true or false");
      }
    }
  }

  template <typename Enum, std::size_t K>
  void choice(const std::string& key, const Named<Enum> (&table)[K], Enum& out) {
    if (const auto* v = raw(key)) out = lookup(table, name_ + "." + key, *v);
  }

  double to_real(const std::string& key, const std::string& text) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != text.size() || text.empty() || !std::isfinite(v)) fail(key, text, "a finite number");
    return v;
  }

  void finish() const {
    if (!section_) return;
    for (const auto& [key, value] : *section_) {
      if (std::find(used_.begin(), used_.end(), key) == used_.end()) {
        throw ArgumentError("unknown key '" + key + "' in [" + name_ + "]");
      }
    }
  }

 private:
  [[noreturn]] void fail(const std::string& key, const std::string& value, const char* what) const {
    throw ArgumentError(name_ + "." + key + " = '" + value + "' is not " + what);
  }

  std::string name_;
  const IniSection* section_ = nullptr;
  std::vector<std::string> used_;
};

std::string num(double v) { return fmt::format("{}", v); }

bool shape_generator(Generator g) { return g == Generator::Blobs || g == Generator::Ellipses; }

}  // namespace

std::string_view to_string(Task task) { return name_of(kTasks, task); }
std::string_view to_string(Generator generator) { return name_of(kGenerators, generator); }

double ExperimentConfig::target_scale() const {
  if (dataset.target_scale > 0.0) return dataset.target_scale;
  switch (task) {
    case Task::AreaRegression: return 1e-3;
    case Task::PerimeterRegression: return 1e-2;
    default: return 1.0;
  }
}

LossKind ExperimentConfig::loss() const {
  switch (task) {
    case Task::Grad2Regression: return LossKind::PixelwiseMSE;
    case Task::AreaRegression:
    case Task::PerimeterRegression: return LossKind::ScalarMSE;
    default: return LossKind::SoftmaxCrossEntropy;
  }
}

bool ExperimentConfig::classification() const { return loss() == LossKind::SoftmaxCrossEntropy; }

void ExperimentConfig::validate() const {
  if (epochs < 0) throw ArgumentError("epochs must be non-negative");
  if (batch_size <= 0) throw ArgumentError("batch_size must be positive");
  if (eval_every <= 0) throw ArgumentError("eval_every must be positive");
  if (learning_rates.empty()) throw ArgumentError("learning_rates must not be empty");
  for (double lr : learning_rates) {
    if (!(lr >= 0.0)) throw ArgumentError("learning rates must be non-negative");
  }
  if (model.kernels <= 0 || model.bins <= 0) throw ArgumentError("kernels and bins must be positive");
  if (dataset.train <= 0 || dataset.validation < 0 || dataset.test < 0) {
    throw ArgumentError("dataset counts must be positive");
  }
  if (dataset.noise_sigma < 0.0) throw ArgumentError("noise_sigma must be non-negative");
  const bool digits = dataset.generator == Generator::Digits || dataset.generator == Generator::Mnist;
  if (task == Task::Grad2Regression) {
    if (!digits) throw ArgumentError("grad2_regression needs the digits or mnist generator");
    if (model.kernel_side != 3 || model.head != HeadKind::OneByOne || model.pooling != Pooling::None) {
      throw ArgumentError("grad2_regression uses a 3x3 kernel and an unpooled one_by_one head");
    }
  } else {
    if (digits) throw ArgumentError(std::string(to_string(task)) + " needs a shape generator");
    if (model.head == HeadKind::OneByOne && model.pooling != Pooling::Mean) {
      throw ArgumentError("scalar tasks with a one_by_one head need pooling = mean");
    }
    if (classification() && model.head != HeadKind::Dense) {
      throw ArgumentError("classification needs a dense head with three outputs");
    }
  }
  if (classification() && model.outputs != 3) throw ArgumentError("classification uses 3 classes");
  if (dataset.generator == Generator::Mnist && dataset.idx_path.empty()) {
    throw ArgumentError("mnist generator needs dataset.idx_path");
  }
}

ExperimentConfig config_from_ini(const IniDocument& doc) {
  for (const auto& [name, section] : doc) {
    if (name != "experiment" && name != "model" && name != "dataset") {
      throw ArgumentError("unknown section [" + name + "]");
    }
  }
  ExperimentConfig c;
  SectionReader ex(doc, "experiment");
  ex.choice("task", kTasks, c.task);
  ex.integer("seed", c.seed);
  ex.integer("epochs", c.epochs);
  ex.integer("batch_size", c.batch_size);
  ex.integer("eval_every", c.eval_every);
  if (const auto* v = ex.raw("learning_rates")) {
    c.learning_rates.clear();
    std::stringstream ss(*v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto first = item.find_first_not_of(' ');
      const auto last = item.find_last_not_of(' ');
      item = first == std::string::npos ? "" : item.substr(first, last - first + 1);
      c.learning_rates.push_back(ex.to_real("learning_rates", item));
    }
  }
  ex.finish();

  // Task-dependent model defaults.
  const bool grad2 = c.task == Task::Grad2Regression;
  c.model.head = grad2 ? HeadKind::OneByOne : HeadKind::Dense;
  c.dataset.generator = grad2 ? Generator::Digits : Generator::Blobs;
  if (grad2) {
    c.dataset.train = 3277;
    c.dataset.validation = 410;
    c.dataset.test = 409;
  }

  SectionReader m(doc, "model");
  m.choice("kind", kModels, c.model.kind);
  c.model.activation =
      c.model.kind == ModelKind::Lon ? ActivationKind::GaussBell : ActivationKind::ReLU;
  if (const auto* v = m.raw("activation")) {
    try {
      c.model.activation = parse_activation(*v);
    } catch (const std::exception&) {
      throw ArgumentError("unknown value '" + *v + "' for model.activation");
    }
  }
  m.integer("kernels", c.model.kernels);
  c.model.bins = c.model.kind == ModelKind::Lon ? 2 : 1;
  m.integer("bins", c.model.bins);
  m.integer("kernel_side", c.model.kernel_side);
  m.choice("head", kHeads, c.model.head);
  c.model.pooling = (!grad2 && c.model.head == HeadKind::OneByOne) ? Pooling::Mean : Pooling::None;
  m.choice("pooling", kPoolings, c.model.pooling);
  m.boolean("sigma_learnable", c.model.sigma_learnable);
  m.choice("boundary", kBoundaries, c.model.boundary);
  if (const auto* v = m.raw("smoother_sigma"); v && *v != "none") {
    c.model.smoother_sigma = m.to_real("smoother_sigma", *v);
  }
  m.finish();

  SectionReader d(doc, "dataset");
  d.choice("generator", kGenerators, c.dataset.generator);
  if (const auto* v = d.raw("seed"); v && *v != "experiment") {
    std::uint64_t s = 0;
    d.integer("seed", s);
    c.dataset.seed = s;
  }
  d.integer("train", c.dataset.train);
  d.integer("validation", c.dataset.validation);
  d.integer("test", c.dataset.test);
  d.real("noise_sigma", c.dataset.noise_sigma);
  d.choice("constraint", kConstraints, c.dataset.constraint);
  d.real("constraint_value", c.dataset.constraint_value);
  d.real("min_axis_ratio", c.dataset.min_axis_ratio);
  std::string idx;
  d.string("idx_path", idx);
  c.dataset.idx_path = idx;
  d.real("target_sigma", c.dataset.target_sigma);
  d.real("target_scale", c.dataset.target_scale);
  d.finish();

  c.model.outputs = c.classification() ? 3 : 1;
  const int side = shape_generator(c.dataset.generator) ? 128 : 28;
  c.model.width = side;
  c.model.height = side;
  c.validate();
  return c;
}

IniDocument config_to_ini(const ExperimentConfig& c) {
  IniDocument doc;
  auto& ex = doc["experiment"];
  ex["task"] = to_string(c.task);
  ex["seed"] = std::to_string(c.seed);
  ex["epochs"] = std::to_string(c.epochs);
  ex["batch_size"] = std::to_string(c.batch_size);
  ex["eval_every"] = std::to_string(c.eval_every);
  std::string lrs;
  for (std::size_t i = 0; i < c.learning_rates.size(); ++i) {
    lrs += (i ? "," : "") + num(c.learning_rates[i]);
  }
  ex["learning_rates"] = lrs;

  auto& m = doc["model"];
  m["kind"] = name_of(kModels, c.model.kind);
  m["activation"] = to_string(c.model.activation);
  m["kernels"] = std::to_string(c.model.kernels);
  m["bins"] = std::to_string(c.model.bins);
  m["kernel_side"] = std::to_string(c.model.kernel_side);
  m["head"] = name_of(kHeads, c.model.head);
  m["pooling"] = name_of(kPoolings, c.model.pooling);
  m["sigma_learnable"] = c.model.sigma_learnable ? "true" : "false";
  m["boundary"] = name_of(kBoundaries, c.model.boundary);
  m["smoother_sigma"] = c.model.smoother_sigma ? num(*c.model.smoother_sigma) : "none";

  auto& d = doc["dataset"];
  d["generator"] = to_string(c.dataset.generator);
  d["seed"] = c.dataset.seed ? std::to_string(*c.dataset.seed) : "experiment";
  d["train"] = std::to_string(c.dataset.train);
  d["validation"] = std::to_string(c.dataset.validation);
  d["test"] = std::to_string(c.dataset.test);
  d["noise_sigma"] = num(c.dataset.noise_sigma);
  d["constraint"] = name_of(kConstraints, c.dataset.constraint);
  d["constraint_value"] = num(c.dataset.constraint_value);
  d["min_axis_ratio"] = num(c.dataset.min_axis_ratio);
  d["idx_path"] = c.dataset.idx_path.string();
  d["target_sigma"] = num(c.dataset.target_sigma);
  d["target_scale"] = num(c.dataset.target_scale);
  return doc;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_ini(parse_ini(ss.str()));
}

std::string config_hash(const ExperimentConfig& config) {
  return sha256_hex(canonical_ini(config_to_ini(config)));
}

std::string hash_comment(const std::string& config_hash) {
  return "# config_sha256=" + config_hash + "\n";
}

// ---- data ------------------------------------------------------------------

DatasetSplits make_dataset(const ExperimentConfig& config) {
  const auto& ds = config.dataset;
  const std::uint64_t seed = config.dataset_seed();
  const int total = ds.train + ds.validation + ds.test;
  std::vector<DatasetRecord> all;
  all.reserve(static_cast<std::size_t>(total));
  const auto file_name = [](int i) { return fmt::format("s{:05d}.lonr", i); };

  if (shape_generator(ds.generator)) {
    std::vector<ShapeSample> samples;
    if (ds.generator == Generator::Blobs) {
      samples = generate_blobs(seed, total);
    } else {
      EllipseOptions opts;
      opts.constraint = ds.constraint;
      opts.value = ds.constraint_value;
      opts.min_axis_ratio = ds.min_axis_ratio;
      samples = generate_ellipses(seed, total, opts);
    }
    const bool by_perimeter =
        config.task == Task::PerimeterClassification || config.task == Task::PerimeterRegression;
    if (total >= 3) assign_classes(samples, by_perimeter ? ClassKey::Perimeter : ClassKey::Area);
    for (int i = 0; i < total; ++i) {
      ShapeSample s = ds.noise_sigma > 0.0
                          ? add_noise(std::move(samples[i]), ds.noise_sigma,
                                      seed ^ (0x9e3779b97f4a7c15ull * (static_cast<std::uint64_t>(i) + 1)))
                          : std::move(samples[i]);
      all.push_back(to_record(s, file_name(i)));
    }
  } else {
    std::vector<Image> images;
    if (ds.generator == Generator::Mnist) {
      images = load_idx(ds.idx_path);
      if (images.size() < static_cast<std::size_t>(total)) {
        throw ArgumentError("IDX file holds " + std::to_string(images.size()) + " images, need " +
                            std::to_string(total));
      }
      images.resize(static_cast<std::size_t>(total));
    } else {
      images = synthetic_digits(seed, total);
    }
    const auto samples = make_grad_samples(images, seed, ds.target_sigma);
    for (int i = 0; i < total; ++i) all.push_back(to_record(samples[i], file_name(i)));
  }

  DatasetSplits splits;
  const auto begin = std::make_move_iterator(all.begin());
  splits.train.assign(begin, begin + ds.train);
  splits.validation.assign(begin + ds.train, begin + ds.train + ds.validation);
  splits.test.assign(begin + ds.train + ds.validation, begin + total);
  return splits;
}

DatasetSplits load_dataset(const std::filesystem::path& dir) {
  DatasetSplits s;
  s.train = read_dataset_split(dir / "train");
  if (std::filesystem::exists(dir / "validation" / "manifest.csv")) {
    s.validation = read_dataset_split(dir / "validation");
  }
  if (std::filesystem::exists(dir / "test" / "manifest.csv")) s.test = read_dataset_split(dir / "test");
  return s;
}

std::vector<Example> to_examples(const ExperimentConfig& config,
                                 std::span<const DatasetRecord> records) {
  std::vector<Example> out;
  out.reserve(records.size());
  const double scale = config.target_scale();
  for (const auto& r : records) {
    Example ex{r.image, {}, -1};
    switch (config.task) {
      case Task::Grad2Regression:
        if (!r.target) throw ArgumentError("record " + r.file + " has no grad2 target");
        ex.target.assign(r.target->values().begin(), r.target->values().end());
        break;
      case Task::AreaRegression:
        if (!r.area) throw ArgumentError("record " + r.file + " has no area label");
        ex.target = {*r.area * scale};
        break;
      case Task::PerimeterRegression:
        if (!r.perimeter) throw ArgumentError("record " + r.file + " has no perimeter label");
        ex.target = {*r.perimeter * scale};
        break;
      case Task::AreaClassification:
      case Task::PerimeterClassification:
        if (!r.class_label) throw ArgumentError("record " + r.file + " has no class label");
        ex.label = *r.class_label;
        break;
    }
    out.push_back(std::move(ex));
  }
  return out;
}

// ---- commands --------------------------------------------------------------

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

std::string metrics_csv(const std::vector<MetricsRow>& log, const std::string& hash) {
  std::string csv = hash_comment(hash) + "epoch,split,loss,accuracy\n";
  for (const auto& row : log) {
    csv += fmt::format("{},{},{},{}\n", row.epoch, row.split, row.loss,
                       row.accuracy ? num(*row.accuracy) : "");
  }
  return csv;
}

const MetricsRow* last_row(const std::vector<MetricsRow>& log, std::string_view split) {
  for (auto it = log.rbegin(); it != log.rend(); ++it) {
    if (it->split == split) return &*it;
  }
  return nullptr;
}

}  // namespace

DatasetSplits cmd_generate(const ExperimentConfig& config, const std::filesystem::path& out) {
  config.validate();
  const std::string hash = config_hash(config);
  DatasetSplits splits = make_dataset(config);
  ensure_dir(out);
  write_dataset_split(out / "train", splits.train, hash);
  write_dataset_split(out / "validation", splits.validation, hash);
  write_dataset_split(out / "test", splits.test, hash);
  write_text(out / "config.ini", canonical_ini(config_to_ini(config)));
  return splits;
}

RunReport cmd_train(const ExperimentConfig& config, const DatasetSplits& data,
                    const std::filesystem::path& out) {
  config.validate();
  if (data.train.empty()) throw ArgumentError("training split is empty");
  const auto start = std::chrono::steady_clock::now();
  RunReport report;
  report.config_hash = config_hash(config);
  report.task = config.task;
  ensure_dir(out);

  const auto train_set = to_examples(config, data.train);
  const auto validation_set = to_examples(config, data.validation);
  std::vector<Image> init_batch;
  for (std::size_t i = 0; i < std::min<std::size_t>(64, train_set.size()); ++i) {
    init_batch.push_back(train_set[i].input);
  }

  TrainOptions options;
  options.loss = config.loss();
  options.epochs = config.epochs;
  options.batch_size = config.batch_size;
  options.seed = config.seed;
  options.eval_every = config.eval_every;

  for (double lr : config.learning_rates) {
    const Network init = build_network(config.model, config.seed, init_batch);
    report.params = count_params(init);
    options.adam.lr = lr;
    const TrainResult result = train(init, options, train_set, validation_set);

    LrRun run;
    run.lr = lr;
    run.directory = out / ("lr_" + num(lr));
    run.diverged = result.diverged;
    run.message = result.message;
    ensure_dir(run.directory);
    write_text(run.directory / "metrics.csv", metrics_csv(result.log, report.config_hash));
    save_checkpoint(result.net, run.directory / "checkpoint.lonc");
    if (const auto* tr = last_row(result.log, "train")) run.final_train_loss = tr->loss;
    const auto* va = last_row(result.log, validation_set.empty() ? "train" : "validation");
    if (va) {
      run.final_validation_loss = va->loss;
      run.final_validation_accuracy = va->accuracy;
    }
    report.runs.push_back(std::move(run));
  }

  // Best by validation: accuracy for classification, loss otherwise.  Ties
  // keep the earlier learning rate; diverged runs only win if all diverged.
  const auto better = [&](const LrRun& a, const LrRun& b) {
    if (a.diverged != b.diverged) return !a.diverged;
    if (config.classification()) {
      const double aa = a.final_validation_accuracy.value_or(0.0);
      const double ba = b.final_validation_accuracy.value_or(0.0);
      if (aa != ba) return aa > ba;
    }
    return a.final_validation_loss < b.final_validation_loss;
  };
  std::size_t best = 0;
  for (std::size_t i = 1; i < report.runs.size(); ++i) {
    if (better(report.runs[i], report.runs[best])) best = i;
  }
  report.best = best;
  report.checkpoint = out / "best.lonc";
  std::filesystem::copy_file(report.runs[best].directory / "checkpoint.lonc", report.checkpoint,
                             std::filesystem::copy_options::overwrite_existing);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_report(report, out / "report.json");
  return report;
}

void write_report(const RunReport& report, const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["config_sha256"] = report.config_hash;
  j["task"] = to_string(report.task);
  j["params"] = {{"paper_formula", report.params.paper_formula}, {"actual", report.params.actual}};
  auto runs = nlohmann::ordered_json::array();
  for (const auto& r : report.runs) {
    nlohmann::ordered_json row;
    row["lr"] = r.lr;
    row["directory"] = r.directory.string();
    row["diverged"] = r.diverged;
    if (!r.message.empty()) row["message"] = r.message;
    row["final_train_loss"] = r.final_train_loss;
    row["final_validation_loss"] = r.final_validation_loss;
    if (r.final_validation_accuracy) row["final_validation_accuracy"] = *r.final_validation_accuracy;
    runs.push_back(row);
  }
  j["runs"] = runs;
  if (report.best) j["best_lr"] = report.runs[*report.best].lr;
  j["checkpoint"] = report.checkpoint.string();
  j["wall_seconds"] = report.wall_seconds;
  write_text(path, j.dump(2) + "\n");
}

EvalSummary cmd_eval(const ExperimentConfig& config, const Network& net,
                     std::span<const DatasetRecord> records, const std::string& split,
                     const std::filesystem::path& out) {
  const auto examples = to_examples(config, records);
  const auto result = evaluate(net, examples, config.loss(), true);
  EvalSummary s;
  s.split = split;
  s.samples = examples.size();
  s.params = count_params(net);
  s.loss = result.loss;
  s.accuracy = result.accuracy;

  const std::string hash = config_hash(config);
  ensure_dir(out);
  write_text(out / ("eval_" + split + ".csv"),
             hash_comment(hash) + "split,samples,params_paper,params_actual,loss,accuracy\n" +
                 fmt::format("{},{},{},{},{},{}\n", split, s.samples, s.params.paper_formula,
                             s.params.actual, s.loss, s.accuracy ? num(*s.accuracy) : ""));

  std::string csv = hash_comment(hash);
  const double scale = config.target_scale();
  switch (config.loss()) {
    case LossKind::PixelwiseMSE:
      csv += "file,mse\n";
      for (std::size_t i = 0; i < examples.size(); ++i) {
        csv += fmt::format("{},{}\n", records[i].file,
                           mean_squared_error(result.predictions[i], examples[i].target).value);
      }
      break;
    case LossKind::ScalarMSE:
      csv += "file,target,prediction\n";
      for (std::size_t i = 0; i < examples.size(); ++i) {
        csv += fmt::format("{},{},{}\n", records[i].file, examples[i].target[0] / scale,
                           result.predictions[i][0] / scale);
      }
      break;
    case LossKind::SoftmaxCrossEntropy:
      csv += "file,label,predicted";
      for (int o = 0; o < net.head.outputs; ++o) csv += fmt::format(",logit_{}", o);
      csv += "\n";
      for (std::size_t i = 0; i < examples.size(); ++i) {
        const auto& p = result.predictions[i];
        const auto predicted = std::max_element(p.begin(), p.end()) - p.begin();
        csv += fmt::format("{},{},{}", records[i].file, examples[i].label, predicted);
        for (double v : p) csv += "," + num(v);
        csv += "\n";
      }
      break;
  }
  write_text(out / ("predictions_" + split + ".csv"), csv);
  return s;
}

std::vector<SaliencyRow> cmd_saliency(const ExperimentConfig& config, const Network& net,
                                      std::span<const DatasetRecord> records,
                                      std::span<const std::string> ids, const std::string& model_id,
                                      const std::filesystem::path& out) {
  // Resolve every id before writing anything.
  std::vector<std::size_t> chosen;
  for (const auto& id : ids) {
    const auto it = std::find_if(records.begin(), records.end(),
                                 [&](const DatasetRecord& r) { return r.file == id; });
    if (it == records.end()) throw ArgumentError("unknown sample id '" + id + "'");
    chosen.push_back(static_cast<std::size_t>(it - records.begin()));
  }
  const std::string hash = config_hash(config);
  ensure_dir(out);
  std::string norm = hash_comment(hash) + "file,min,max\n";
  std::string mass = hash_comment(hash) + "file,model,predicted,true,boundary_mass_ratio\n";
  std::vector<SaliencyRow> rows;
  for (std::size_t idx : chosen) {
    const auto& rec = records[idx];
    const auto ex = to_examples(config, std::span(&rec, 1)).front();
    const SaliencyMap map = saliency(net, ex, config.loss(), rec.file, model_id);
    Image mask(rec.image.width(), rec.image.height());
    for (std::size_t p = 0; p < mask.size(); ++p) mask[p] = rec.image[p] > 0.5 ? 1.0 : 0.0;
    SaliencyRow row{rec.file, map.predicted_class, map.true_class,
                    boundary_mass_ratio(map.map, mask)};
    const std::string stem = std::filesystem::path(rec.file).stem().string();
    write_lonr(map.map, out / (stem + ".saliency.lonr"));
    const PgmScaling scaling = minmax_scaling(map.map);
    write_pgm(map.map, out / (stem + ".saliency.pgm"), 8, scaling);
    norm += fmt::format("{},{},{}\n", rec.file, scaling.lo, scaling.hi);
    mass += fmt::format("{},{},{},{},{}\n", rec.file, model_id,
                        row.predicted ? std::to_string(*row.predicted) : "",
                        row.truth ? std::to_string(*row.truth) : "", row.boundary_mass);
    rows.push_back(std::move(row));
  }
  write_text(out / "normalization.csv", norm);
  write_text(out / "boundary_mass.csv", mass);
  return rows;
}

// ---- gradcheck suite -------------------------------------------------------

namespace {

struct Variant {
  std::string name;
  ModelKind kind;
  ActivationKind activation;
  HeadKind head;
  Pooling pooling;
  LossKind loss;
  std::optional<double> smoother;
};

// Moves every bias of a ReLU network to the middle of the widest gap between
// the sorted responses of its kernel so no pre-activation sits near the kink.
void clear_relu_kinks(Network& net, const Image& img) {
  for (int j = 0; j < net.kernel_count; ++j) {
    const Image r = convolve(img, net.kernels[j], net.boundary);
    std::vector<double> v(r.values().begin(), r.values().end());
    std::sort(v.begin(), v.end());
    double best_gap = -1.0, mid = v.front();
    for (std::size_t k = 1; k < v.size(); ++k) {
      if (v[k] - v[k - 1] > best_gap) {
        best_gap = v[k] - v[k - 1];
        mid = 0.5 * (v[k] + v[k - 1]);
      }
    }
    for (int i = 0; i < net.bins; ++i) net.bias[j * net.bins + i] = mid;
  }
}

}  // namespace

std::vector<GradcheckCase> gradcheck_suite(std::uint64_t seed, double step, double tolerance,
                                           bool corrupt) {
  constexpr int kSize = 5;
  const std::vector<Variant> variants = {
      {"lon_gauss_bell_dense", ModelKind::Lon, ActivationKind::GaussBell, HeadKind::Dense,
       Pooling::None, LossKind::SoftmaxCrossEntropy, std::nullopt},
      {"lon_gauss_bell_one_by_one", ModelKind::Lon, ActivationKind::GaussBell, HeadKind::OneByOne,
       Pooling::None, LossKind::PixelwiseMSE, std::nullopt},
      {"lon_gauss_bell_one_by_one_mean", ModelKind::Lon, ActivationKind::GaussBell,
       HeadKind::OneByOne, Pooling::Mean, LossKind::ScalarMSE, std::nullopt},
      {"lon_gauss_bell_smoothed_dense", ModelKind::Lon, ActivationKind::GaussBell, HeadKind::Dense,
       Pooling::None, LossKind::ScalarMSE, 0.5},
      {"cnn_sigmoid_dense", ModelKind::Cnn, ActivationKind::LogisticSigmoid, HeadKind::Dense,
       Pooling::None, LossKind::SoftmaxCrossEntropy, std::nullopt},
      {"cnn_sigmoid_one_by_one", ModelKind::Cnn, ActivationKind::LogisticSigmoid,
       HeadKind::OneByOne, Pooling::None, LossKind::PixelwiseMSE, std::nullopt},
      {"cnn_relu_dense", ModelKind::Cnn, ActivationKind::ReLU, HeadKind::Dense, Pooling::None,
       LossKind::SoftmaxCrossEntropy, std::nullopt},
      {"cnn_relu_one_by_one", ModelKind::Cnn, ActivationKind::ReLU, HeadKind::OneByOne,
       Pooling::None, LossKind::PixelwiseMSE, std::nullopt},
      {"cnn_integrated_bell_dense", ModelKind::Cnn, ActivationKind::IntegratedBell,
       HeadKind::Dense, Pooling::None, LossKind::SoftmaxCrossEntropy, std::nullopt},
      {"cnn_integrated_bell_one_by_one", ModelKind::Cnn, ActivationKind::IntegratedBell,
       HeadKind::OneByOne, Pooling::None, LossKind::PixelwiseMSE, std::nullopt},
  };

  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x6cu};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const GradientFn corrupted = [](const Network& n, const ForwardTape& t, std::span<const double> up,
                                  bool input) {
    Gradients g = backward(n, t, up, input);
    for (double& v : g.params) v = v * 1.01 + 1e-3;
    for (double& v : g.input.values()) v = v * 1.01 + 1e-3;
    return g;
  };

  std::vector<GradcheckCase> cases;
  for (const auto& v : variants) {
    Image img(kSize, kSize);
    for (double& p : img.values()) p = unit(rng);
    NetworkSpec spec;
    spec.kind = v.kind;
    spec.activation = v.activation;
    spec.kernels = 2;
    spec.bins = v.kind == ModelKind::Lon ? 2 : 1;
    spec.kernel_side = 3;
    spec.head = v.head;
    spec.pooling = v.pooling;
    spec.outputs = v.loss == LossKind::SoftmaxCrossEntropy ? 3 : 1;
    spec.width = kSize;
    spec.height = kSize;
    spec.smoother_sigma = v.smoother;
    Network net = build_network(spec, seed + cases.size(), std::span(&img, 1));
    // Nonzero head biases and off-grid widths exercise every term.
    for (double& b : net.head.bias) b = unit(rng) - 0.5;
    for (double& s : net.log_sigma) s += 0.2 * (unit(rng) - 0.5);
    if (v.activation == ActivationKind::ReLU) clear_relu_kinks(net, img);

    Example ex;
    ex.input = img;
    if (v.loss == LossKind::SoftmaxCrossEntropy) {
      ex.label = static_cast<int>(rng() % 3);
    } else if (v.loss == LossKind::ScalarMSE) {
      ex.target = {unit(rng)};
    } else {
      ex.target.resize(img.size());
      for (double& t : ex.target) t = unit(rng);
    }
    cases.push_back({v.name, gradcheck(net, ex, v.loss, step, tolerance,
                                       corrupt ? corrupted : GradientFn{})});
  }
  return cases;
}

void write_gradcheck_csv(std::span<const GradcheckCase> cases, const std::filesystem::path& path,
                         const std::string& config_hash) {
  std::string csv = hash_comment(config_hash) + "architecture,group,checked,max_rel_error,passed\n";
  for (const auto& c : cases) {
    for (const auto& g : c.report.groups) {
      csv += fmt::format("{},{},{},{:.3e},{}\n", c.name, g.name, g.checked, g.max_rel_error,
                         g.passed ? "true" : "false");
    }
  }
  write_text(path, csv);
}

}  // namespace lon
