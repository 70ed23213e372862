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

#include <cstdint>
#include <filesystem>
#include <istream>
#include <vector>

#include <Eigen/Core>

#include "facecut/geometry.hpp"
#include "facecut/image.hpp"
#include "facecut/landmarks.hpp"

namespace facecut {

/// Cascade of regression-tree forests over pixel-difference features, read
/// from the binary shape-predictor format written by dlib (the published
/// 68-point model is stored this way).
class ShapePredictor {
 public:
  struct Split {
    std::uint64_t idx1 = 0;
    std::uint64_t idx2 = 0;
    float thresh = 0;
  };

  struct Tree {
    std::vector<Split> splits;
    std::vector<Eigen::VectorXf> leaves;
  };

  /// Throws ProviderInitError on a missing or malformed file.
  static ShapePredictor load(const std::filesystem::path& path);
  static ShapePredictor read(std::istream& in);

  std::size_t landmark_count() const {
    return static_cast<std::size_t>(initial_shape_.size() / 2);
  }

  /// Landmarks in image coordinates, rounded to whole pixels.
  std::vector<Point2d> predict(const RgbImage& image, const FaceBox& box) const;

 private:
  Eigen::VectorXf initial_shape_;
  std::vector<std::vector<Tree>> forests_;
  std::vector<std::vector<std::uint64_t>> anchor_idx_;
  std::vector<std::vector<Eigen::Vector2f>> deltas_;
};

}  // namespace facecut
