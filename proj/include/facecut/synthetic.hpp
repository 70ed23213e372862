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
#include <random>
#include <vector>

#include <opencv2/core.hpp>

#include "facecut/dataset.hpp"
#include "facecut/geometry.hpp"
#include "facecut/image.hpp"
#include "facecut/landmarks.hpp"

namespace facecut {

/// Geometry of a generated face: an ellipse whose lower arc carries the jaw,
/// with brows above the jaw ends and the nasion between the brows.
struct FaceShape {
  Point2d center;
  double radius_x = 0;
  double radius_y = 0;
  double rotation = 0;  ///< radians, applied about the center
};

/// Random shape that fits inside a width x height frame with a margin.
FaceShape random_face_shape(std::mt19937_64& rng, int height, int width);

/// 68 landmarks with the jaw in convex position on the lower arc and the
/// brows above its end points.
std::vector<Point2d> plausible_landmarks(const FaceShape& shape, std::mt19937_64& rng);

/// Tight axis-aligned box around the points, rounded outwards.
FaceBox bounding_box(std::span<const Point2d> points);

struct SyntheticSample {
  RgbImage image;
  SidecarFace face;
  Label label = Label::without_mask;
  cv::Rect square;  ///< the class-coloured block, in image coordinates
};

/// Noise background, a grey noisy face, and a solid block on the lower face
/// coloured by class.
SyntheticSample render_synthetic_sample(std::mt19937_64& rng, Label label, int size = 96);

struct SyntheticEntry {
  std::filesystem::path image;
  Label label;
  cv::Rect square;
};

/// Writes `count` samples (classes alternating) as PNG plus sidecar under
/// `<root>/<label>/`.
std::vector<SyntheticEntry> generate_synthetic_dataset(const std::filesystem::path& root, int count,
                                                       std::uint64_t seed, int size = 96);

}  // namespace facecut
