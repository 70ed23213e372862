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

#include "facecut/explain.hpp"

#include <algorithm>
#include <cmath>

#include "facecut/classifier.hpp"
#include "facecut/errors.hpp"

namespace facecut {

Rgb colormap(double heat) {
  const double h = std::isfinite(heat) ? std::clamp(heat, 0.0, 1.0) : 0.0;
  return kHeatColormap[static_cast<std::size_t>(std::lround(h * 255.0))];
}

Heatmap grad_cam(const nn::FeatureMaps<double>& tap, const nn::Dense<double>& head,
                 std::size_t target_class) {
  if (tap.batch != 1) throw ShapeError("grad_cam expects a single sample");
  if (target_class >= static_cast<std::size_t>(head.weight.rows())) {
    throw InputError("target class " + std::to_string(target_class) + " out of range");
  }
  if (head.weight.cols() != tap.channels()) throw ShapeError("head does not match the feature tap");

  const auto c = static_cast<Eigen::Index>(target_class);
  const nn::Matrix<double> grad_pooled = head.weight.row(c).transpose();
  const nn::FeatureMaps<double> grad = nn::global_average_pool_backward(grad_pooled, tap.height, tap.width);

  Heatmap heat;
  heat.channel_weights = grad.sample(0).rowwise().mean();
  const Eigen::RowVectorXd weighted = heat.channel_weights.transpose() * tap.sample(0);
  heat.values.resize(tap.height, tap.width);
  for (int y = 0; y < tap.height; ++y) {
    for (int x = 0; x < tap.width; ++x) {
      heat.values(y, x) = std::max(0.0, weighted(Eigen::Index{y} * tap.width + x));
    }
  }
  const double peak = heat.values.maxCoeff();
  if (peak > 0) heat.values /= peak;
  return heat;
}

namespace {

double sample_bilinear(const Eigen::MatrixXd& map, double ty, double tx) {
  const double y = std::clamp(ty, 0.0, static_cast<double>(map.rows() - 1));
  const double x = std::clamp(tx, 0.0, static_cast<double>(map.cols() - 1));
  const auto y0 = static_cast<Eigen::Index>(std::floor(y));
  const auto x0 = static_cast<Eigen::Index>(std::floor(x));
  const Eigen::Index y1 = std::min(y0 + 1, map.rows() - 1);
  const Eigen::Index x1 = std::min(x0 + 1, map.cols() - 1);
  const double fy = y - static_cast<double>(y0);
  const double fx = x - static_cast<double>(x0);
  return (1 - fy) * ((1 - fx) * map(y0, x0) + fx * map(y0, x1)) +
         fy * ((1 - fx) * map(y1, x0) + fx * map(y1, x1));
}

}  // namespace

Eigen::MatrixXd upsample_bilinear(const Eigen::MatrixXd& map, int height, int width) {
  if (map.size() == 0 || height <= 0 || width <= 0) throw ShapeError("upsample needs non-empty shapes");
  Eigen::MatrixXd out(height, width);
  const double sy = static_cast<double>(map.rows()) / height;
  const double sx = static_cast<double>(map.cols()) / width;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      out(y, x) = sample_bilinear(map, (y + 0.5) * sy - 0.5, (x + 0.5) * sx - 0.5);
    }
  }
  return out;
}

Heatmap compute_cam(const Classifier& model, const RgbImage& image, std::size_t target_class) {
  if (!model.exposes_feature_tap()) throw CapabilityError("model exposes no spatial feature maps");
  if (target_class >= model.class_names().size()) {
    throw InputError("target class " + std::to_string(target_class) + " out of range");
  }
  const RgbImage prepared = model.prepare(image);
  const nn::FeatureMaps<double> tap = model.features({&prepared, 1});
  Heatmap heat = grad_cam(tap, model.head(), target_class);

  const auto& config = model.config();
  const Letterbox box = letterbox_geometry(image.rows, image.cols, config.image_height, config.image_width);
  const bool identity = image.rows == config.image_height && image.cols == config.image_width;
  heat.upsampled.resize(image.rows, image.cols);
  const double tap_sy = static_cast<double>(tap.height) / config.image_height;
  const double tap_sx = static_cast<double>(tap.width) / config.image_width;
  for (int y = 0; y < image.rows; ++y) {
    const double cy = identity ? y : box.canvas_y(y, image.rows);
    for (int x = 0; x < image.cols; ++x) {
      const double cx = identity ? x : box.canvas_x(x, image.cols);
      heat.upsampled(y, x) = sample_bilinear(heat.values, (cy + 0.5) * tap_sy - 0.5, (cx + 0.5) * tap_sx - 0.5);
    }
  }
  return heat;
}

RgbImage overlay(const Eigen::MatrixXd& heat, const RgbImage& image, double alpha) {
  if (heat.rows() != image.rows || heat.cols() != image.cols) {
    throw ShapeError("heatmap and image differ in size");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InputError("alpha must lie in [0, 1]");
  RgbImage out(image.rows, image.cols);
  for (int y = 0; y < image.rows; ++y) {
    for (int x = 0; x < image.cols; ++x) {
      const cv::Vec3b color = colormap(heat(y, x)).vec();
      const cv::Vec3b& px = image(y, x);
      for (int c = 0; c < 3; ++c) {
        const double v = (1.0 - alpha) * px[c] + alpha * color[c];
        out(y, x)[c] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return out;
}

cv::Mat1b heat_to_gray(const Eigen::MatrixXd& heat) {
  cv::Mat1b gray(static_cast<int>(heat.rows()), static_cast<int>(heat.cols()));
  for (int y = 0; y < gray.rows; ++y) {
    for (int x = 0; x < gray.cols; ++x) {
      gray(y, x) = static_cast<std::uint8_t>(std::lround(std::clamp(heat(y, x), 0.0, 1.0) * 255.0));
    }
  }
  return gray;
}

}  // namespace facecut
