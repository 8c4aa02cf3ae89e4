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

// Command line front end: generate / train / eval / saliency / gradcheck /
// probe.  Exit codes: 0 ok, 1 usage, 2 numeric failure, 3 IO.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "lon/analysis.hpp"
#include "lon/errors.hpp"
#include "lon/experiment.hpp"
#include "lon/raster_io.hpp"

namespace {

constexpr int kUsage = 1;
constexpr int kNumeric = 2;
constexpr int kIo = 3;

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
};

// Config errors are usage errors, whatever layer detected them.
lon::ExperimentConfig load(const Globals& g) {
  if (g.config.empty()) throw CLI::RequiredError("--config");
  lon::ExperimentConfig c;
  try {
    c = lon::load_config(g.config);
  } catch (const lon::ParseError& e) {
    throw lon::ArgumentError(g.config + ": " + e.what());
  }
  if (g.seed) c.seed = *g.seed;
  c.validate();
  return c;
}

std::vector<lon::DatasetRecord> split_of(const lon::DatasetSplits& s, const std::string& name) {
  if (name == "train") return s.train;
  if (name == "validation") return s.validation;
  if (name == "test") return s.test;
  throw lon::ArgumentError("unknown split '" + name + "'");
}

int run_gradcheck(const Globals& g, double step, double tolerance, bool corrupt) {
  const std::uint64_t seed = g.seed.value_or(0);
  const auto cases = lon::gradcheck_suite(seed, step, tolerance, corrupt);
  std::filesystem::create_directories(g.out);
  const std::string hash = lon::sha256_hex(
      fmt::format("gradcheck seed={} step={} tolerance={} corrupt={}", seed, step, tolerance, corrupt));
  lon::write_gradcheck_csv(cases, std::filesystem::path(g.out) / "gradcheck.csv", hash);
  bool ok = true;
  for (const auto& c : cases) {
    for (const auto& grp : c.report.groups) {
      fmt::print("{:<34} {:<13} {:>4} params  max rel err {:.2e}  {}\n", c.name, grp.name,
                 grp.checked, grp.max_rel_error, grp.passed ? "ok" : "FAIL");
    }
    ok = ok && c.report.passed;
  }
  return ok ? 0 : kNumeric;
}

int run_probe(const Globals& g, const std::string& image, int x, int y,
              const std::vector<double>& grid, double tonal, double spatial,
              const std::string& kernel, double kernel_sigma) {
  const lon::Image img = lon::read_image(image);
  if (grid.size() != 3 || grid[2] < 1) throw lon::ArgumentError("--bins expects lo,hi,count");
  const auto bins = lon::bin_centres(grid[0], grid[1], static_cast<int>(grid[2]));
  lon::Kernel k = lon::Kernel::identity(1);
  if (kernel == "dx") {
    k = lon::gaussian_derivative_kernel(kernel_sigma, lon::Axis::X);
  } else if (kernel == "dy") {
    k = lon::gaussian_derivative_kernel(kernel_sigma, lon::Axis::Y);
  } else if (kernel == "gauss") {
    k = lon::gaussian_kernel(kernel_sigma);
  } else if (kernel != "identity") {
    throw lon::ArgumentError("unknown --kernel '" + kernel + "'");
  }
  std::optional<lon::Kernel> w;
  if (spatial > 0.0) w = lon::gaussian_kernel(spatial);
  const auto stack = lon::local_histogram(img, k, w, bins, tonal);
  const auto probe = lon::probe_at(stack, x, y, spatial);
  std::filesystem::create_directories(g.out);
  const std::string hash = lon::sha256_hex(fmt::format(
      "probe {} x={} y={} bins={},{},{} tonal={} spatial={} kernel={} ks={}", image, x, y, grid[0],
      grid[1], grid[2], tonal, spatial, kernel, kernel_sigma));
  std::string csv = lon::hash_comment(hash) + "bin,value\n";
  for (std::size_t i = 0; i < probe.bins.size(); ++i) {
    csv += fmt::format("{},{}\n", probe.bins[i], probe.values[i]);
  }
  std::ofstream(std::filesystem::path(g.out) / "probe.csv", std::ios::binary) << csv;
  fmt::print("{}", csv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Locally orderless networks: data generation, training and analysis"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "Experiment config (INI)");
  app.add_option("--seed", g.seed, "Override the experiment seed");
  app.add_option("--out", g.out, "Output directory");

  auto* generate = app.add_subcommand("generate", "Write a dataset directory");
  generate->fallthrough();

  std::string data_dir, checkpoint, split = "test", model_id;
  auto* train = app.add_subcommand("train", "Train one run per learning rate");
  train->fallthrough();
  train->add_option("--data", data_dir, "Dataset directory (generated on the fly when omitted)");

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a split");
  eval->fallthrough();
  eval->add_option("--checkpoint", checkpoint)->required();
  eval->add_option("--data", data_dir)->required();
  eval->add_option("--split", split);

  std::vector<std::string> ids;
  bool all_ids = false;
  int limit = -1;
  auto* sal = app.add_subcommand("saliency", "Input-gradient saliency maps");
  sal->fallthrough();
  sal->add_option("--checkpoint", checkpoint)->required();
  sal->add_option("--data", data_dir)->required();
  sal->add_option("--split", split);
  sal->add_option("--ids", ids, "Sample file names")->delimiter(',');
  sal->add_flag("--all", all_ids, "Every sample of the split");
  sal->add_option("--limit", limit, "With --all: first N samples");
  sal->add_option("--model-id", model_id);

  double step = 1e-5, tolerance = 1e-5;
  bool corrupt = false;
  auto* gc = app.add_subcommand("gradcheck", "Finite-difference check of every architecture");
  gc->fallthrough();
  gc->add_option("--step", step);
  gc->add_option("--tolerance", tolerance);
  gc->add_flag("--corrupt", corrupt, "Perturb the analytic gradient (negative control)");

  std::string image, kernel = "identity";
  int px = 0, py = 0;
  std::vector<double> grid;
  double tonal = 0.1, spatial = 0.0, kernel_sigma = 1.0;
  auto* probe = app.add_subcommand("probe", "Local histogram at one pixel");
  probe->fallthrough();
  probe->add_option("--image", image)->required();
  probe->add_option("--x", px)->required();
  probe->add_option("--y", py)->required();
  probe->add_option("--bins", grid, "lo,hi,count")->delimiter(',')->required();
  probe->add_option("--tonal-sigma", tonal);
  probe->add_option("--spatial-sigma", spatial, "Gaussian W scale (0 = delta)");
  probe->add_option("--kernel", kernel, "identity, gauss, dx or dy");
  probe->add_option("--kernel-sigma", kernel_sigma);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  const std::filesystem::path out(g.out);
  try {
    if (generate->parsed()) {
      const auto config = load(g);
      const auto s = lon::cmd_generate(config, out);
      fmt::print("wrote {} / {} / {} samples to {}\n", s.train.size(), s.validation.size(),
                 s.test.size(), out.string());
      return 0;
    }
    if (train->parsed()) {
      const auto config = load(g);
      const auto data = data_dir.empty() ? lon::make_dataset(config) : lon::load_dataset(data_dir);
      const auto report = lon::cmd_train(config, data, out);
      bool any_ok = false;
      for (const auto& r : report.runs) {
        fmt::print("lr {:<8} train {:.6g}  validation {:.6g}{}{}\n", r.lr, r.final_train_loss,
                   r.final_validation_loss,
                   r.final_validation_accuracy
                       ? fmt::format("  accuracy {:.4f}", *r.final_validation_accuracy)
                       : "",
                   r.diverged ? "  DIVERGED: " + r.message : "");
        any_ok = any_ok || !r.diverged;
      }
      fmt::print("params paper-formula {} actual {}; best lr {}\n", report.params.paper_formula,
                 report.params.actual, report.runs[*report.best].lr);
      return any_ok ? 0 : kNumeric;
    }
    if (eval->parsed()) {
      const auto config = load(g);
      const auto net = lon::load_checkpoint(checkpoint);
      const auto records = split_of(lon::load_dataset(data_dir), split);
      const auto s = lon::cmd_eval(config, net, records, split, out);
      fmt::print("{} samples {} loss {:.6g}{}\n", s.split, s.samples, s.loss,
                 s.accuracy ? fmt::format(" accuracy {:.4f}", *s.accuracy) : "");
      return 0;
    }
    if (sal->parsed()) {
      const auto config = load(g);
      const auto net = lon::load_checkpoint(checkpoint);
      const auto records = split_of(lon::load_dataset(data_dir), split);
      if (all_ids) {
        ids.clear();
        for (const auto& r : records) {
          if (limit >= 0 && static_cast<int>(ids.size()) >= limit) break;
          ids.push_back(r.file);
        }
      }
      const auto rows = lon::cmd_saliency(config, net, records, ids,
                                          model_id.empty() ? checkpoint : model_id, out);
      double mean = 0.0;
      for (const auto& r : rows) mean += r.boundary_mass / static_cast<double>(rows.size());
      fmt::print("{} maps, mean boundary mass ratio {:.4f}\n", rows.size(), rows.empty() ? 0.0 : mean);
      return 0;
    }
    if (gc->parsed()) return run_gradcheck(g, step, tolerance, corrupt);
    if (probe->parsed()) return run_probe(g, image, px, py, grid, tonal, spatial, kernel, kernel_sigma);
  } catch (const CLI::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const lon::NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return kNumeric;
  } catch (const lon::IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return kIo;
  } catch (const lon::ParseError& e) {
    std::fprintf(stderr, "malformed input: %s\n", e.what());
    return kIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return kIo;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  }
  return kUsage;
}
