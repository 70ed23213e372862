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
#include <string_view>

#include <opencv2/core.hpp>

namespace facecut {

/// 8-bit raster with channels in R, G, B order. Conversion to and from the
/// BGR order used by the OpenCV codecs happens only in load_rgb/save_rgb.
using RgbImage = cv::Mat3b;

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;

  cv::Vec3b vec() const { return {r, g, b}; }
};

/// Parses "R,G,B" with each component in [0,255].
Rgb parse_rgb(std::string_view text);

/// An image together with the file it was decoded from. Sidecar landmark
/// lookup needs the path; everything else only looks at the pixels.
struct SourceImage {
  RgbImage pixels;
  std::filesystem::path path;
};

bool is_image_file(const std::filesystem::path& path);

/// Throws DecodeError when the file is missing, unreadable or empty.
RgbImage load_rgb(const std::filesystem::path& path);
SourceImage load_source_image(const std::filesystem::path& path);

/// Throws IoError when encoding or writing fails.
void save_rgb(const std::filesystem::path& path, const RgbImage& image);
void save_gray(const std::filesystem::path& path, const cv::Mat1b& image);

/// Placement of a resized source inside a fixed-size padded canvas.
struct Letterbox {
  int canvas_height = 0;
  int canvas_width = 0;
  int inner_height = 0;
  int inner_width = 0;
  int offset_y = 0;
  int offset_x = 0;

  /// Continuous pixel-center coordinate in the canvas for a source column.
  double canvas_x(double source_x, int source_width) const {
    return offset_x + (source_x + 0.5) * inner_width / source_width - 0.5;
  }
  double canvas_y(double source_y, int source_height) const {
    return offset_y + (source_y + 0.5) * inner_height / source_height - 0.5;
  }
};

Letterbox letterbox_geometry(int source_height, int source_width,
                             int canvas_height, int canvas_width);

/// Aspect-preserving bilinear resize into a canvas filled with `pad`.
RgbImage letterbox(const RgbImage& image, int canvas_height, int canvas_width,
                   Rgb pad);

}  // namespace facecut
