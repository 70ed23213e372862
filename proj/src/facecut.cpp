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

#include "facecut/facecut.hpp"

#include <algorithm>

#include <opencv2/imgproc.hpp>

namespace facecut {

BoundaryPath select_boundary_points(const LandmarkSet& landmarks, bool include_point_zero) {
  BoundaryPath path;
  const std::size_t jaw_start = include_point_zero ? 0 : 1;
  for (std::size_t i = jaw_start; i <= 16; ++i) path.indices.push_back(i);
  for (std::size_t i = 26; i >= 22; --i) path.indices.push_back(i);
  path.indices.push_back(27);
  for (std::size_t i = 21; i >= 17; --i) path.indices.push_back(i);
  path.points.reserve(path.indices.size());
  for (std::size_t index : path.indices) path.points.push_back(landmarks[index]);
  return path;
}

BoundaryPath clamp_to_image(BoundaryPath path, int height, int width) {
  for (auto& p : path.points) {
    p.x() = std::clamp(p.x(), 0.0, static_cast<double>(width - 1));
    p.y() = std::clamp(p.y(), 0.0, static_cast<double>(height - 1));
  }
  return path;
}

BinaryMask build_face_mask(const BoundaryPath& path, int height, int width) {
  if (height <= 0 || width <= 0) throw ShapeError("mask dimensions must be positive");
  const BoundaryPath clamped = clamp_to_image(path, height, width);
  std::vector<Point2d> distinct;
  for (const auto& p : clamped.points) {
    if (std::find(distinct.begin(), distinct.end(), p) == distinct.end()) distinct.push_back(p);
    if (distinct.size() >= 3) break;
  }
  if (distinct.size() < 3) {
    throw DegeneratePolygonError("boundary has fewer than 3 distinct vertices");
  }
  return rasterize_polygon<double>(clamped.points, height, width);
}

CutImage apply_cut(const RgbImage& image, const BinaryMask& mask, Rgb fill) {
  if (mask.rows() != image.rows || mask.cols() != image.cols) {
    throw ShapeError("mask is " + std::to_string(mask.rows()) + "x" +
                     std::to_string(mask.cols()) + " but image is " +
                     std::to_string(image.rows) + "x" + std::to_string(image.cols));
  }
  int top = image.rows, bottom = -1, left = image.cols, right = -1;
  for (int r = 0; r < image.rows; ++r) {
    for (int c = 0; c < image.cols; ++c) {
      if (!mask(r, c)) continue;
      top = std::min(top, r);
      bottom = std::max(bottom, r);
      left = std::min(left, c);
      right = std::max(right, c);
    }
  }
  if (bottom < 0) throw EmptyMaskError("mask has no set cells");

  CutImage cut;
  cut.fill = fill;
  cut.top = top;
  cut.left = left;
  cut.pixels = RgbImage(bottom - top + 1, right - left + 1, fill.vec());
  for (int r = top; r <= bottom; ++r) {
    for (int c = left; c <= right; ++c) {
      if (mask(r, c)) cut.pixels(r - top, c - left) = image(r, c);
    }
  }
  return cut;
}

std::vector<CutImage> cut_face(const SourceImage& image, const LandmarkProvider& provider,
                               const FaceCutOptions& options) {
  std::vector<FaceBox> boxes = provider.detect_faces(image);
  if (boxes.empty()) {
    switch (options.no_face) {
      case NoFacePolicy::skip:
        return {};
      case NoFacePolicy::passthrough: {
        CutImage whole;
        whole.pixels = image.pixels.clone();
        whole.fill = options.fill;
        whole.passthrough = true;
        return {std::move(whole)};
      }
      case NoFacePolicy::error:
        throw NoFaceError("no face found in " + image.path.string());
    }
  }
  if (options.faces == FacePolicy::largest) {
    const auto largest = std::max_element(
        boxes.begin(), boxes.end(),
        [](const FaceBox& a, const FaceBox& b) { return a.area() < b.area(); });
    boxes = {*largest};
  }

  const int height = image.pixels.rows;
  const int width = image.pixels.cols;
  std::vector<CutImage> cuts;
  cuts.reserve(boxes.size());
  for (const FaceBox& box : boxes) {
    const LandmarkSet landmarks = provider.detect_landmarks(image, box);
    BoundaryPath path = clamp_to_image(
        select_boundary_points(landmarks, options.include_point_zero), height, width);
    const BinaryMask mask = build_face_mask(path, height, width);
    CutImage cut = apply_cut(image.pixels, mask, options.fill);
    cut.boundary = std::move(path);
    cuts.push_back(std::move(cut));
  }
  return cuts;
}

RgbImage draw_boundary_overlay(const RgbImage& image, const BoundaryPath& path) {
  RgbImage canvas = image.clone();
  const int radius = std::max(1, std::min(image.rows, image.cols) / 100);
  std::vector<cv::Point> outline;
  for (const auto& p : path.points) {
    outline.emplace_back(static_cast<int>(std::lround(p.x())), static_cast<int>(std::lround(p.y())));
  }
  if (outline.size() >= 2) {
    cv::polylines(canvas, outline, true, cv::Scalar(255, 255, 0), 1, cv::LINE_AA);
  }
  for (const auto& p : outline) {
    cv::circle(canvas, p, radius, cv::Scalar(255, 0, 0), cv::FILLED, cv::LINE_AA);
  }
  return canvas;
}

}  // namespace facecut
