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

#include <array>
#include <cstddef>

#include <Eigen/Core>
#include <opencv2/core.hpp>

#include "facecut/image.hpp"
#include "facecut/nn.hpp"

namespace facecut {

class Classifier;

/// Grad-CAM output. `values` has the feature tap's spatial size, `upsampled`
/// the size of the explained image; both lie in [0, 1].
struct Heatmap {
  Eigen::MatrixXd values;
  Eigen::MatrixXd upsampled;
  Eigen::VectorXd channel_weights;  ///< spatial mean of d logit / d feature map
};

extern const std::array<Rgb, 256> kHeatColormap;

/// Table lookup at round(heat * 255), heat clamped to [0, 1].
Rgb colormap(double heat);

/// Gradient-weighted class activation map for a single-sample tap feeding a
/// global-average-pool + dense head: weights are the spatial means of the
/// target logit's gradient, the map is ReLU of the weighted channel sum,
/// divided by its maximum unless it is identically zero.
Heatmap grad_cam(const nn::FeatureMaps<double>& tap, const nn::Dense<double>& head,
                 std::size_t target_class);

/// Bilinear resize with half-pixel centers (align_corners = false) and edge
/// clamping.
Eigen::MatrixXd upsample_bilinear(const Eigen::MatrixXd& map, int height, int width);

/// Grad-CAM for `image` as the model sees it, mapped back onto the image
/// through the letterbox. Throws CapabilityError when the model has no
/// spatial feature tap and InputError on an unknown class.
Heatmap compute_cam(const Classifier& model, const RgbImage& image, std::size_t target_class);

/// (1 - alpha) * image + alpha * colormap(heat), rounded and clamped.
RgbImage overlay(const Eigen::MatrixXd& heat, const RgbImage& image, double alpha = 0.4);

cv::Mat1b heat_to_gray(const Eigen::MatrixXd& heat);

}  // namespace facecut
