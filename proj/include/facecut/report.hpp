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

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <opencv2/core.hpp>

#include "facecut/classifier.hpp"
#include "facecut/metrics.hpp"

namespace facecut {

enum class CurveKind { loss, accuracy };

/// Rendered chart plus the pixel position of every plotted point, one series
/// per line (train first, then validation).
struct CurvePlot {
  cv::Mat3b image;
  std::vector<std::vector<cv::Point>> series;
};

/// Throws ParseError on an empty history.
CurvePlot plot_curves(const std::vector<EpochStats>& history, CurveKind kind, int width = 640, int height = 400);

/// Per-class precision/recall/F1/support with accuracy and averages, then
/// class accuracy, ACSA and PPV. Undefined rates print as "n/a".
std::string summary_text(const MetricsReport& report);

struct ReportFiles {
  std::filesystem::path loss_plot;
  std::filesystem::path accuracy_plot;
  std::filesystem::path summary;
};

/// Reads both inputs and writes loss.png, accuracy.png and summary.txt into
/// `out_dir`. Throws ParseError on a malformed or empty history.
ReportFiles write_report_bundle(const std::filesystem::path& history_csv, const std::filesystem::path& metrics_json,
                                const std::filesystem::path& out_dir);

}  // namespace facecut
