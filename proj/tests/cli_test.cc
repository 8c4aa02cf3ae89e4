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

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <string>

#include "gtest/gtest.h"
#include "lon/raster_io.hpp"
#include "test_util.hpp"

namespace lon {
namespace {

using testing::ReadFile;
using testing::TempDir;

// Runs the CLI with stdout/stderr captured to `log`; returns the exit code.
int RunCli(const std::string& args, const std::filesystem::path& log) {
  const std::string cmd =
      std::string(LON_CLI_PATH) + " " + args + " > '" + log.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

class CliTest : public ::testing::Test {
 protected:
  CliTest() : dir_("cli") {
    config_ = dir_.path() / "c.ini";
    std::ofstream(config_) << "[experiment]\ntask = grad2_regression\nseed = 2\nepochs = 1\n"
                              "batch_size = 4\n[dataset]\ntrain = 6\nvalidation = 3\ntest = 3\n";
    log_ = dir_.path() / "log.txt";
  }
  std::string Cfg() const { return "--config '" + config_.string() + "'"; }
  std::string Out(const std::string& sub) const {
    return "--out '" + (dir_.path() / sub).string() + "'";
  }
  TempDir dir_;
  std::filesystem::path config_, log_;
};

TEST_F(CliTest, UsageErrorsExitWithOne) {
  EXPECT_EQ(RunCli("", log_), 1);
  EXPECT_EQ(RunCli("generate", log_), 1);
  EXPECT_EQ(RunCli("frobnicate", log_), 1);
  std::ofstream(dir_.path() / "bad.ini") << "[experiment]\ntask = grad2_regression\nepoch = 1\n";
  EXPECT_EQ(RunCli("generate --config '" + (dir_.path() / "bad.ini").string() + "' " + Out("g"), log_), 1);
  EXPECT_NE(ReadFile(log_).find("epoch"), std::string::npos);
  std::ofstream(dir_.path() / "dup.ini") << "[experiment]\nseed = 1\nseed = 2\n";
  EXPECT_EQ(RunCli("generate --config '" + (dir_.path() / "dup.ini").string() + "' " + Out("g"), log_), 1);
}

TEST_F(CliTest, IoErrorsExitWithThree) {
  EXPECT_EQ(RunCli("generate --config '" + (dir_.path() / "missing.ini").string() + "' " + Out("g"), log_), 3);
  EXPECT_EQ(RunCli("eval " + Cfg() + " --checkpoint nowhere.lonc --data nowhere " + Out("e"), log_), 3);
}

TEST_F(CliTest, GenerateIsByteIdentical) {
  ASSERT_EQ(RunCli("generate " + Cfg() + " " + Out("a"), log_), 0);
  ASSERT_EQ(RunCli("generate " + Cfg() + " " + Out("b"), log_), 0);
  for (const char* split : {"train", "validation", "test"}) {
    const auto rel = std::filesystem::path(split) / "manifest.csv";
    EXPECT_EQ(ReadFile(dir_.path() / "a" / rel), ReadFile(dir_.path() / "b" / rel));
  }
  ASSERT_EQ(RunCli("generate --seed 9 " + Cfg() + " " + Out("c"), log_), 0);
  EXPECT_NE(ReadFile(dir_.path() / "a" / "train" / "manifest.csv"),
            ReadFile(dir_.path() / "c" / "train" / "manifest.csv"));
}

TEST_F(CliTest, TrainEvalSaliencyPipeline) {
  const std::string data = "--data '" + (dir_.path() / "d").string() + "'";
  ASSERT_EQ(RunCli("generate " + Cfg() + " " + Out("d"), log_), 0);
  ASSERT_EQ(RunCli("train " + Cfg() + " " + data + " " + Out("t"), log_), 0) << ReadFile(log_);
  const std::string ckpt = "--checkpoint '" + (dir_.path() / "t" / "best.lonc").string() + "'";
  ASSERT_EQ(RunCli("eval " + Cfg() + " " + ckpt + " " + data + " " + Out("e1"), log_), 0);
  ASSERT_EQ(RunCli("eval " + Cfg() + " " + ckpt + " " + data + " " + Out("e2"), log_), 0);
  EXPECT_EQ(ReadFile(dir_.path() / "e1" / "eval_test.csv"), ReadFile(dir_.path() / "e2" / "eval_test.csv"));
  EXPECT_EQ(ReadFile(dir_.path() / "e1" / "predictions_test.csv"),
            ReadFile(dir_.path() / "e2" / "predictions_test.csv"));
  EXPECT_EQ(RunCli("saliency " + Cfg() + " " + ckpt + " " + data + " --ids s99999.lonr " + Out("s"), log_), 1);
  EXPECT_NE(ReadFile(log_).find("s99999.lonr"), std::string::npos);
  EXPECT_EQ(RunCli("saliency " + Cfg() + " " + ckpt + " " + data + " --all " + Out("s"), log_), 0);
  EXPECT_TRUE(std::filesystem::exists(dir_.path() / "s" / "boundary_mass.csv"));
  EXPECT_EQ(RunCli("eval " + Cfg() + " " + ckpt + " " + data + " --split bogus " + Out("e3"), log_), 1);
}

TEST_F(CliTest, GradcheckExitCodes) {
  EXPECT_EQ(RunCli("gradcheck " + Out("gc"), log_), 0);
  EXPECT_TRUE(std::filesystem::exists(dir_.path() / "gc" / "gradcheck.csv"));
  EXPECT_EQ(RunCli("gradcheck --corrupt " + Out("gc2"), log_), 2);
  EXPECT_EQ(RunCli("gradcheck --step 0 " + Out("gc3"), log_), 1);
}

TEST_F(CliTest, ProbeWritesHistogram) {
  const auto img = dir_.path() / "flat.lonr";
  write_lonr(Image(9, 9, 0.5), img);
  ASSERT_EQ(RunCli("probe --image '" + img.string() + "' --x 4 --y 4 --bins 0,1,4 --tonal-sigma 0.2 " +
                    Out("p"),
                log_),
            0);
  const std::string csv = ReadFile(dir_.path() / "p" / "probe.csv");
  EXPECT_NE(csv.find("bin,value\n0.125,"), std::string::npos);
  EXPECT_EQ(RunCli("probe --image '" + img.string() + "' --x 40 --y 4 --bins 0,1,4 " + Out("p"), log_), 1);
}

}  // namespace
}  // namespace lon
