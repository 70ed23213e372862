// Copyright 2026 The facecut-pipeline Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>

#include "facecut/config.hpp"
#include "facecut/dataset.hpp"
#include "facecut/errors.hpp"
#include "facecut/metrics.hpp"
#include "oracles.hpp"

using namespace facecut;
namespace fs = std::filesystem;

namespace {

int pipeline(const std::string& args) {
  const std::string cmd = std::string("\"") + FACECUT_PIPELINE_EXE + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

void write_text(const fs::path& path, const std::string& text) { std::ofstream(path) << text; }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("exit codes") {
  CHECK(pipeline("--help") == 0);
  CHECK(pipeline("train --help") == 0);
  CHECK(pipeline("") == 2);
  CHECK(pipeline("frobnicate") == 2);
  const fs::path dir = oracle::scratch_dir("cli_codes");
  write_text(dir / "m.csv", std::string(kManifestHeader) + "\n");
  CHECK(pipeline("split --manifest " + q(dir / "m.csv") + " --out " + q(dir / "o.csv") + " --ratios 0.5,0.5") == 2);
  CHECK(pipeline("cut --output-dir " + q(dir / "c")) == 2);
  CHECK(pipeline("cut --input-dir " + q(dir) + " --output-dir " + q(dir / "c") + " --no-face maybe") == 2);
  // Parses fine, then the module rejects the ratios.
  CHECK(pipeline("split --manifest " + q(dir / "m.csv") + " --out " + q(dir / "o.csv") + " --ratios 0.5,0.5,0.5") == 1);
  CHECK(pipeline("scan --input-dir " + q(dir) + " --manifest " + q(dir / "s.csv")) == 1);
  write_text(dir / "bad.json", R"({"facecut": {"fil": [0, 0, 0]}})");
  CHECK(pipeline("--config " + q(dir / "bad.json") + " synth --output-dir " + q(dir / "syn") + " --count 2") == 1);
  CHECK(pipeline("--config " + q(dir / "missing.json") + " synth --output-dir " + q(dir / "syn")) == 2);
}

TEST_CASE("config rejects unknown keys and bad values") {
  CHECK_NOTHROW(PipelineConfig::from_json(nlohmann::json::object()));
  CHECK_THROWS_AS(PipelineConfig::from_json({{"colour", 1}}), ConfigError);
  CHECK_THROWS_AS(PipelineConfig::from_json({{"classifier", {{"epoch", 3}}}}), ConfigError);
  CHECK_THROWS_AS(PipelineConfig::from_json({{"classifier", {{"loss", "hinge"}}}}), ConfigError);
  CHECK_THROWS_AS(PipelineConfig::from_json({{"classifier", {{"epochs", "ten"}}}}), ConfigError);
  CHECK_THROWS_AS(PipelineConfig::from_json({{"dataset", {{"ratios", {0.5, 0.5}}}}}), ConfigError);
  CHECK_THROWS_AS(PipelineConfig::from_json({{"facecut", {{"fill", "300,0,0"}}}}), ConfigError);
}

TEST_CASE("config values and round trip") {
  const auto c = PipelineConfig::from_json(nlohmann::json::parse(R"({
    "facecut": {"fill": [255, 0, 255], "no_face": "passthrough", "include_point_zero": true},
    "dataset": {"seed": 7, "ratios": [0.7, 0.15, 0.15]},
    "classifier": {"epochs": 3, "loss": "kl", "learning_rate": 0.001}
  })"));
  CHECK(c.facecut.fill == Rgb{255, 0, 255});
  CHECK(c.facecut.no_face == NoFacePolicy::passthrough);
  CHECK(c.facecut.include_point_zero);
  CHECK(c.seed == 7);
  CHECK(c.ratios.train == 0.7);
  CHECK(c.classifier.epochs == 3);
  CHECK(c.classifier.loss == LossKind::kl_divergence);
  CHECK(c.classifier.image_height == 64);
  const auto again = PipelineConfig::from_json(nlohmann::json::parse(c.to_json().dump()));
  CHECK(again.to_json() == c.to_json());

  const auto large = PipelineConfig::from_json({{"classifier", {{"backbone", "large"}}}});
  CHECK(large.classifier.image_height == 224);
  CHECK(large.classifier.pixel_std[0] != 1.0);
  CHECK_THROWS_AS(PipelineConfig::load("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("end to end on a tiny synthetic set") {
  const fs::path dir = oracle::scratch_dir("cli_e2e");
  REQUIRE(pipeline("synth --output-dir " + q(dir / "raw") + " --count 24 --seed 3 --size 48") == 0);
  REQUIRE(pipeline("scan --input-dir " + q(dir / "raw") + " --manifest " + q(dir / "raw.csv")) == 0);
  CHECK(read_manifest(dir / "raw.csv").records.size() == 24);
  REQUIRE(pipeline("cut --input-dir " + q(dir / "raw") + " --output-dir " + q(dir / "cut") + " --fill 0,0,0") == 0);
  REQUIRE(pipeline("split --manifest " + q(dir / "cut" / "manifest.csv") + " --out " + q(dir / "split.csv") +
                   " --seed 5") == 0);
  const DatasetManifest m = read_manifest(dir / "split.csv");
  REQUIRE(m.records.size() == 24);

  // Config says three epochs, the flag wins.
  write_text(dir / "config.json", R"({"classifier": {"epochs": 3, "batch_size": 8, "image_size": [32, 32],
                                     "toy_channels": [4, 8], "learning_rate": 0.001}})");
  REQUIRE(pipeline("--config " + q(dir / "config.json") + " train --manifest " + q(dir / "split.csv") +
                   " --epochs 1 --out " + q(dir / "model")) == 0);
  CHECK(read_history(dir / "model" / "history.csv").size() == 1);
  REQUIRE(pipeline("--config " + q(dir / "config.json") + " train --manifest " + q(dir / "split.csv") +
                   " --out " + q(dir / "model3")) == 0);
  CHECK(read_history(dir / "model3" / "history.csv").size() == 3);

  // Report locations default to report.dir.
  write_text(dir / "reports.json", "{\"report\": {\"dir\": " + nlohmann::json((dir / "rep").string()).dump() + "}}");
  REQUIRE(pipeline("--config " + q(dir / "reports.json") + " eval --manifest " + q(dir / "split.csv") + " --model " +
                   q(dir / "model3")) == 0);
  CHECK(fs::exists(dir / "rep" / "metrics.json"));
  REQUIRE(pipeline("--config " + q(dir / "reports.json") + " report --history " +
                   q(dir / "model3" / "history.csv") + " --metrics " + q(dir / "rep" / "metrics.json")) == 0);
  CHECK(fs::exists(dir / "rep" / "summary.txt"));

  REQUIRE(pipeline("eval --manifest " + q(dir / "split.csv") + " --model " + q(dir / "model3") + " --report " +
                   q(dir / "metrics.json")) == 0);
  const MetricsReport r = read_report(dir / "metrics.json");
  CHECK(r.confusion.sum() == 4);  // 12 per class, 2 each in test

  const fs::path image = dir / "cut" / m.records.front().path;
  REQUIRE(pipeline("gradcam --model " + q(dir / "model3") + " --image " + q(image) +
                   " --class with_mask --out " + q(dir / "cam.png")) == 0);
  CHECK(fs::exists(dir / "cam.png"));
  CHECK(fs::exists(dir / "cam.heatmap.png"));
  CHECK(pipeline("gradcam --model " + q(dir / "model3") + " --image " + q(image) + " --class beard --out " +
                 q(dir / "x.png")) == 1);

  REQUIRE(pipeline("report --history " + q(dir / "model3" / "history.csv") + " --metrics " +
                   q(dir / "metrics.json") + " --output-dir " + q(dir / "report")) == 0);
  CHECK(fs::exists(dir / "report" / "loss.png"));
  CHECK(fs::exists(dir / "report" / "accuracy.png"));
  CHECK(fs::exists(dir / "report" / "summary.txt"));
}

}  // TEST_SUITE
