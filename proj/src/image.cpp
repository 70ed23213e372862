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

#include "facecut/image.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <string>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "facecut/errors.hpp"

namespace facecut {

Rgb parse_rgb(std::string_view text) {
  std::array<int, 3> parts{};
  std::size_t count = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(',', start), text.size());
    if (count == parts.size()) {
      throw InputError("color must have exactly three components: " +
                       std::string(text));
    }
    const auto token = text.substr(start, end - start);
    int value = -1;
    const auto [ptr, ec] =
        std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size() || value < 0 ||
        value > 255) {
      throw InputError("invalid color component '" + std::string(token) + "'");
    }
    parts[count++] = value;
    start = end + 1;
  }
  if (count != parts.size()) {
    throw InputError("color must have exactly three components: " +
                     std::string(text));
  }
  return {static_cast<std::uint8_t>(parts[0]),
          static_cast<std::uint8_t>(parts[1]),
          static_cast<std::uint8_t>(parts[2])};
}

bool is_image_file(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  static constexpr std::array<std::string_view, 9> kKnown = {
      ".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff", ".webp", ".ppm", ".pgm"};
  return std::find(kKnown.begin(), kKnown.end(), ext) != kKnown.end();
}

RgbImage load_rgb(const std::filesystem::path& path) {
  cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) {
    throw DecodeError("cannot decode image " + path.string());
  }
  RgbImage rgb;
  cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
  return rgb;
}

SourceImage load_source_image(const std::filesystem::path& path) {
  return {load_rgb(path), path};
}

void save_rgb(const std::filesystem::path& path, const RgbImage& image) {
  cv::Mat bgr;
  cv::cvtColor(image, bgr, cv::COLOR_RGB2BGR);
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), bgr);
  } catch (const cv::Exception& e) {
    throw IoError("cannot write " + path.string() + ": " + e.what());
  }
  if (!ok) throw IoError("cannot write " + path.string());
}

void save_gray(const std::filesystem::path& path, const cv::Mat1b& image) {
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), image);
  } catch (const cv::Exception& e) {
    throw IoError("cannot write " + path.string() + ": " + e.what());
  }
  if (!ok) throw IoError("cannot write " + path.string());
}

Letterbox letterbox_geometry(int source_height, int source_width,
                             int canvas_height, int canvas_width) {
  if (source_height <= 0 || source_width <= 0 || canvas_height <= 0 ||
      canvas_width <= 0) {
    throw ShapeError("letterbox needs positive dimensions");
  }
  const double scale =
      std::min(static_cast<double>(canvas_height) / source_height,
               static_cast<double>(canvas_width) / source_width);
  Letterbox box;
  box.canvas_height = canvas_height;
  box.canvas_width = canvas_width;
  box.inner_height = std::clamp(
      static_cast<int>(std::lround(source_height * scale)), 1, canvas_height);
  box.inner_width = std::clamp(
      static_cast<int>(std::lround(source_width * scale)), 1, canvas_width);
  box.offset_y = (canvas_height - box.inner_height) / 2;
  box.offset_x = (canvas_width - box.inner_width) / 2;
  return box;
}

RgbImage letterbox(const RgbImage& image, int canvas_height, int canvas_width,
                   Rgb pad) {
  const Letterbox box =
      letterbox_geometry(image.rows, image.cols, canvas_height, canvas_width);
  RgbImage canvas(canvas_height, canvas_width, pad.vec());
  cv::Mat roi = canvas(cv::Rect(box.offset_x, box.offset_y, box.inner_width,
                                box.inner_height));
  if (box.inner_height == image.rows && box.inner_width == image.cols) {
    image.copyTo(roi);
  } else {
    cv::resize(image, roi, roi.size(), 0, 0, cv::INTER_LINEAR);
  }
  return canvas;
}

}  // namespace facecut
