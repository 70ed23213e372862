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

#include <fstream>

#include "facecut/errors.hpp"
#include "facecut/report.hpp"
#include "oracles.hpp"

using namespace facecut;
namespace fs = std::filesystem;

namespace {

std::vector<EpochStats> ramp(int epochs) {
  std::vector<EpochStats> h;
  for (int e = 1; e <= epochs; ++e) {
    h.push_back({e, 1.0 / e, 0.5 + 0.04 * e, 1.2 / e, 0.45 + 0.04 * e});
  }
  return h;
}

}  // namespace

TEST_SUITE("report") {

TEST_CASE("curves have one point per epoch") {
  for (const CurveKind kind : {CurveKind::loss, CurveKind::accuracy}) {
    const CurvePlot plot = plot_curves(ramp(10), kind);
    CHECK(plot.image.cols == 640);
    CHECK(plot.image.rows == 400);
    REQUIRE(plot.series.size() == 2);
    for (const auto& s : plot.series) {
      CHECK(s.size() == 10);
      for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i].x > s[i - 1].x);
      for (const auto& p : s) {
        CHECK(p.x >= 0);
        CHECK(p.x < 640);
        CHECK(p.y >= 0);
        CHECK(p.y < 400);
      }
    }
  }
  // Falling loss plots upward in image rows; rising accuracy the other way.
  const auto loss = plot_curves(ramp(10), CurveKind::loss).series[0];
  CHECK(loss.back().y > loss.front().y);
  const auto acc = plot_curves(ramp(10), CurveKind::accuracy).series[0];
  CHECK(acc.back().y < acc.front().y);
}

TEST_CASE("single epoch and empty history") {
  CHECK(plot_curves(ramp(1), CurveKind::loss).series[1].size() == 1);
  CHECK_THROWS_AS(plot_curves({}, CurveKind::loss), ParseError);
}

TEST_CASE("bundle writes plots and summary") {
  const fs::path dir = oracle::scratch_dir("report_bundle");
  const fs::path history = dir / "history.csv";
  write_history(history, ramp(4));
  CountMatrix m(2, 2);
  m << 40, 2, 3, 55;
  write_report(dir / "metrics.json", compute_metrics(ConfusionMatrix{m, {"without_mask", "with_mask"}}));
  const ReportFiles files = write_report_bundle(history, dir / "metrics.json", dir / "out");
  CHECK(fs::file_size(files.loss_plot) > 0);
  CHECK(fs::file_size(files.accuracy_plot) > 0);
  std::ifstream in(files.summary);
  const std::string text((std::istreambuf_iterator<char>(in)), {});
  CHECK(text.find("with_mask") != std::string::npos);
  CHECK(text.find("macro avg") != std::string::npos);
  CHECK(text.find("acsa") != std::string::npos);

  std::ofstream(dir / "empty.csv") << "epoch,train_loss,train_acc,val_loss,val_acc\n";
  CHECK_THROWS_AS(write_report_bundle(dir / "empty.csv", dir / "metrics.json", dir / "out2"), ParseError);
}

}  // TEST_SUITE
