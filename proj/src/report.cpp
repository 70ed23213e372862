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

#include "facecut/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <fmt/format.h>
#include <opencv2/imgproc.hpp>

#include "facecut/errors.hpp"
#include "facecut/image.hpp"

namespace facecut {

namespace fs = std::filesystem;

namespace {

const cv::Vec3b kTrainColor(31, 119, 180);
const cv::Vec3b kValColor(255, 127, 14);

std::string rate_text(const Rate& r, int digits) {
  return r ? fmt::format("{:.{}f}", *r, digits) : std::string("n/a");
}

}  // namespace

CurvePlot plot_curves(const std::vector<EpochStats>& history, CurveKind kind, int width, int height) {
  if (history.empty()) throw ParseError("empty training history");
  const bool loss = kind == CurveKind::loss;
  std::vector<double> train, val;
  for (const auto& e : history) {
    train.push_back(loss ? e.train_loss : e.train_acc);
    val.push_back(loss ? e.val_loss : e.val_acc);
  }
  double lo = std::min(*std::min_element(train.begin(), train.end()), *std::min_element(val.begin(), val.end()));
  double hi = std::max(*std::max_element(train.begin(), train.end()), *std::max_element(val.begin(), val.end()));
  if (!loss) {
    lo = std::min(lo, 0.0);
    hi = std::max(hi, 1.0);
  }
  if (hi - lo < 1e-12) hi = lo + 1;

  CurvePlot plot;
  plot.image = cv::Mat3b(height, width, cv::Vec3b(255, 255, 255));
  const int left = 60, right = width - 20, top = 30, bottom = height - 45;
  cv::rectangle(plot.image, {left, top}, {right, bottom}, cv::Scalar(0, 0, 0));
  const int n = static_cast<int>(history.size());
  auto to_px = [&](int i, double v) {
    const double fx = n == 1 ? 0.5 : static_cast<double>(i) / (n - 1);
    const double fy = (v - lo) / (hi - lo);
    return cv::Point(static_cast<int>(std::lround(left + fx * (right - left))),
                     static_cast<int>(std::lround(bottom - fy * (bottom - top))));
  };
  for (int t = 0; t <= 4; ++t) {
    const double v = lo + (hi - lo) * t / 4;
    const cv::Point p = to_px(0, v);
    cv::line(plot.image, {left - 4, p.y}, {left, p.y}, cv::Scalar(0, 0, 0));
    cv::putText(plot.image, fmt::format("{:.3f}", v), {4, p.y + 4}, cv::FONT_HERSHEY_SIMPLEX, 0.35,
                cv::Scalar(0, 0, 0));
  }
  for (int i = 0; i < n; ++i) {
    const cv::Point p = to_px(i, lo);
    cv::putText(plot.image, std::to_string(history[i].epoch), {p.x - 4, bottom + 16}, cv::FONT_HERSHEY_SIMPLEX, 0.35,
                cv::Scalar(0, 0, 0));
  }
  cv::putText(plot.image, "epoch", {(left + right) / 2 - 20, height - 10}, cv::FONT_HERSHEY_SIMPLEX, 0.45,
              cv::Scalar(0, 0, 0));
  cv::putText(plot.image, loss ? "loss" : "accuracy", {left, 20}, cv::FONT_HERSHEY_SIMPLEX, 0.5, cv::Scalar(0, 0, 0));

  const std::vector<double>* values[2] = {&train, &val};
  const cv::Vec3b colors[2] = {kTrainColor, kValColor};
  const char* names[2] = {"train", "val"};
  for (int s = 0; s < 2; ++s) {
    std::vector<cv::Point> pts;
    for (int i = 0; i < n; ++i) pts.push_back(to_px(i, (*values[s])[i]));
    const cv::Scalar color(colors[s][0], colors[s][1], colors[s][2]);
    cv::polylines(plot.image, pts, false, color, 2, cv::LINE_AA);
    for (const auto& p : pts) cv::circle(plot.image, p, 3, color, cv::FILLED, cv::LINE_AA);
    cv::line(plot.image, {right - 90, top + 14 + 16 * s}, {right - 70, top + 14 + 16 * s}, color, 2);
    cv::putText(plot.image, names[s], {right - 64, top + 18 + 16 * s}, cv::FONT_HERSHEY_SIMPLEX, 0.4,
                cv::Scalar(0, 0, 0));
    plot.series.push_back(std::move(pts));
  }
  return plot;
}

std::string summary_text(const MetricsReport& r) {
  const std::size_t k = r.class_names.size();
  std::size_t width = 16;
  for (const auto& name : r.class_names) width = std::max(width, name.size() + 2);
  std::string out;
  out += fmt::format("{:<{}}{:>10}{:>10}{:>10}{:>10}\n", "class", width, "precision", "recall", "f1-score", "support");
  for (std::size_t i = 0; i < k; ++i) {
    out += fmt::format("{:<{}}{:>10}{:>10}{:>10}{:>10}\n", r.class_names[i], width, rate_text(r.precision[i], 2),
                       rate_text(r.recall[i], 2), rate_text(r.f1[i], 2), r.support[i]);
  }
  std::int64_t total = 0;
  for (auto s : r.support) total += s;
  out += "\n";
  out += fmt::format("{:<{}}{:>10}{:>10}{:>10.2f}{:>10}\n", "accuracy", width, "", "", r.accuracy, total);
  auto averaged = [&](const char* label, const AveragedScores& a) {
    out += fmt::format("{:<{}}{:>10}{:>10}{:>10}{:>10}\n", label, width, rate_text(a.precision, 2),
                       rate_text(a.recall, 2), rate_text(a.f1, 2), a.support);
  };
  averaged("macro avg", r.macro_avg);
  averaged("weighted avg", r.weighted_avg);

  out += "\n";
  out += fmt::format("{:<{}}", "parameter", width);
  for (const auto& name : r.class_names) out += fmt::format("{:>{}}", name, std::max<std::size_t>(name.size() + 2, 10));
  out += "\n";
  auto row = [&](const char* label, const std::vector<Rate>& values) {
    out += fmt::format("{:<{}}", label, width);
    for (std::size_t i = 0; i < k; ++i) {
      out += fmt::format("{:>{}}", rate_text(values[i], 4), std::max<std::size_t>(r.class_names[i].size() + 2, 10));
    }
    out += "\n";
  };
  row("class accuracy", r.class_accuracy);
  row("ppv", r.ppv);
  out += fmt::format("acsa {}\n", rate_text(r.acsa, 4));
  return out;
}

ReportFiles write_report_bundle(const fs::path& history_csv, const fs::path& metrics_json, const fs::path& out_dir) {
  const auto history = read_history(history_csv);
  if (history.empty()) throw ParseError("empty training history: " + history_csv.string());
  const MetricsReport report = read_report(metrics_json);
  fs::create_directories(out_dir);
  ReportFiles files{out_dir / "loss.png", out_dir / "accuracy.png", out_dir / "summary.txt"};
  save_rgb(files.loss_plot, plot_curves(history, CurveKind::loss).image);
  save_rgb(files.accuracy_plot, plot_curves(history, CurveKind::accuracy).image);
  std::ofstream out(files.summary);
  if (!out) throw IoError("cannot write " + files.summary.string());
  out << summary_text(report);
  if (!out) throw IoError("cannot write " + files.summary.string());
  return files;
}

}  // namespace facecut
