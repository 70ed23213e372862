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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "facecut/errors.hpp"
#include "facecut/geometry.hpp"
#include "facecut/image.hpp"
#include "facecut/landmarks.hpp"

namespace facecut {

/// Closed face outline: jaw, left brow reversed, nasion (27), right brow
/// reversed. The closing edge back to the first jaw point is implicit.
struct BoundaryPath {
  std::vector<std::size_t> indices;
  std::vector<Point2d> points;

  std::size_t size() const { return points.size(); }
  bool is_simple() const { return is_simple_polygon<double>(points); }
};

/// Jaw 1..16 (0..16 with `include_point_zero`), brows 26..22, nasion 27,
/// brows 21..17: 27 or 28 vertices.
BoundaryPath select_boundary_points(const LandmarkSet& landmarks,
                                    bool include_point_zero = false);

/// Pulls every vertex into [0, width-1] x [0, height-1].
BoundaryPath clamp_to_image(BoundaryPath path, int height, int width);

/// Row-major height x width grid of {0, 1}.
using BinaryMask =
    Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Scanline even-odd fill sampled at pixel centers (c, r). Cells whose center
/// lies on an edge are set. Vertices are used as given; no clamping.
///
/// Interior cells of row r are the c with an odd number of edge crossings
/// strictly to their right, where an edge (a, b) crosses when exactly one
/// endpoint has y > r, at x = a.x + (r - a.y) * (b.x - a.x) / (b.y - a.y).
template <typename Scalar>
BinaryMask rasterize_polygon(std::span<const Point2<Scalar>> polygon, int height,
                             int width) {
  if (height <= 0 || width <= 0) throw ShapeError("mask dimensions must be positive");
  BinaryMask mask = BinaryMask::Zero(height, width);
  const std::size_t n = polygon.size();
  std::vector<Scalar> crossings;
  crossings.reserve(n);
  for (int r = 0; r < height; ++r) {
    const Scalar y = static_cast<Scalar>(r);
    crossings.clear();
    for (std::size_t i = 0; i < n; ++i) {
      const auto& a = polygon[i];
      const auto& b = polygon[(i + 1) % n];
      if ((a.y() > y) != (b.y() > y)) {
        crossings.push_back(a.x() + (y - a.y()) * (b.x() - a.x()) / (b.y() - a.y()));
      }
    }
    std::sort(crossings.begin(), crossings.end());
    for (std::size_t k = 0; k + 1 < crossings.size(); k += 2) {
      // c in [x_2k, x_2k+1)
      const auto first = static_cast<long>(std::ceil(crossings[k]));
      const auto last = static_cast<long>(std::ceil(crossings[k + 1])) - 1;
      for (long c = std::max(first, 0L); c <= std::min(last, long{width} - 1); ++c) {
        mask(r, c) = 1;
      }
    }
  }
  // Boundary cells: only centers inside an edge's bounding box can lie on it.
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = polygon[i];
    const auto& b = polygon[(i + 1) % n];
    const long r0 = std::max(0L, static_cast<long>(std::ceil(std::min(a.y(), b.y()))));
    const long r1 = std::min(long{height} - 1, static_cast<long>(std::floor(std::max(a.y(), b.y()))));
    const long c0 = std::max(0L, static_cast<long>(std::ceil(std::min(a.x(), b.x()))));
    const long c1 = std::min(long{width} - 1, static_cast<long>(std::floor(std::max(a.x(), b.x()))));
    for (long r = r0; r <= r1; ++r) {
      for (long c = c0; c <= c1; ++c) {
        if (mask(r, c)) continue;
        const Point2<Scalar> p(static_cast<Scalar>(c), static_cast<Scalar>(r));
        if (on_segment(p, a, b)) mask(r, c) = 1;
      }
    }
  }
  return mask;
}

/// Clamps the path into the grid and fills it. Throws DegeneratePolygonError
/// when fewer than 3 distinct vertices remain.
BinaryMask build_face_mask(const BoundaryPath& path, int height, int width);

/// Masked crop of an image.
struct CutImage {
  RgbImage pixels;
  Rgb fill;
  int top = 0;   ///< row of pixels(0, 0) in the source image
  int left = 0;  ///< column of pixels(0, 0) in the source image
  bool passthrough = false;
  BoundaryPath boundary;  ///< clamped outline in source coordinates; empty for passthrough
};

/// Paints cells outside the mask with `fill` and crops to the mask's tight
/// bounding box. Throws ShapeError on a size mismatch and EmptyMaskError when
/// nothing is set.
CutImage apply_cut(const RgbImage& image, const BinaryMask& mask, Rgb fill);

enum class FacePolicy { largest, all };
enum class NoFacePolicy { skip, passthrough, error };

struct FaceCutOptions {
  bool include_point_zero = false;
  Rgb fill{0, 0, 0};
  FacePolicy faces = FacePolicy::largest;
  NoFacePolicy no_face = NoFacePolicy::skip;
};

/// Detect, outline, rasterize and cut. With no detections: `skip` returns an
/// empty list, `passthrough` returns the untouched image flagged as such, and
/// `error` throws NoFaceError.
std::vector<CutImage> cut_face(const SourceImage& image, const LandmarkProvider& provider,
                               const FaceCutOptions& options);

/// Boundary markers and outline drawn over the image for visual inspection.
RgbImage draw_boundary_overlay(const RgbImage& image, const BoundaryPath& path);

}  // namespace facecut
