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
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace facecut {

/// Image-plane point: x is the column, y is the row. Pixel (r, c) has its
/// center at (c, r).
template <typename Scalar>
using Point2 = Eigen::Matrix<Scalar, 2, 1>;

using Point2d = Point2<double>;

template <typename Scalar>
using PointList = std::vector<Point2<Scalar>>;

/// Twice the signed area of triangle (a, b, c); positive when counter-clockwise
/// in a y-up frame.
template <typename Scalar>
Scalar cross(const Point2<Scalar>& a, const Point2<Scalar>& b,
             const Point2<Scalar>& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

/// True when p lies on the closed segment [a, b].
template <typename Scalar>
bool on_segment(const Point2<Scalar>& p, const Point2<Scalar>& a,
                const Point2<Scalar>& b) {
  return cross(a, b, p) == Scalar(0) &&
         std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) &&
         std::min(a.y(), b.y()) <= p.y() && p.y() <= std::max(a.y(), b.y());
}

template <typename Scalar>
int sign(Scalar v) {
  return (v > Scalar(0)) - (v < Scalar(0));
}

/// Closed-segment intersection test, including touching and collinear overlap.
template <typename Scalar>
bool segments_intersect(const Point2<Scalar>& p1, const Point2<Scalar>& p2,
                        const Point2<Scalar>& q1, const Point2<Scalar>& q2) {
  const int d1 = sign(cross(q1, q2, p1));
  const int d2 = sign(cross(q1, q2, p2));
  const int d3 = sign(cross(p1, p2, q1));
  const int d4 = sign(cross(p1, p2, q2));
  if (d1 * d2 < 0 && d3 * d4 < 0) return true;
  return (d1 == 0 && on_segment(p1, q1, q2)) ||
         (d2 == 0 && on_segment(p2, q1, q2)) ||
         (d3 == 0 && on_segment(q1, p1, p2)) ||
         (d4 == 0 && on_segment(q2, p1, p2));
}

/// A closed polygon is simple when non-adjacent edges never meet and adjacent
/// edges share only their common vertex.
template <typename Scalar>
bool is_simple_polygon(std::span<const Point2<Scalar>> vertices) {
  const std::size_t n = vertices.size();
  if (n < 3) return false;
  auto at = [&](std::size_t i) -> const Point2<Scalar>& {
    return vertices[i % n];
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      if (!adjacent) {
        if (segments_intersect(at(i), at(i + 1), at(j), at(j + 1))) {
          return false;
        }
        continue;
      }
      // Adjacent pair: shared vertex is fine, folding back along the edge is not.
      const auto& shared = (j == i + 1) ? at(j) : at(i);
      const auto& a = (j == i + 1) ? at(i) : at(i + 1);
      const auto& b = (j == i + 1) ? at(j + 1) : at(j);
      if (cross(a, shared, b) == Scalar(0) &&
          (shared - a).dot(b - shared) <= Scalar(0)) {
        return false;
      }
    }
  }
  return true;
}

template <typename Scalar>
Scalar signed_area(std::span<const Point2<Scalar>> vertices) {
  Scalar twice = 0;
  const std::size_t n = vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = vertices[i];
    const auto& b = vertices[(i + 1) % n];
    twice += a.x() * b.y() - b.x() * a.y();
  }
  return twice / Scalar(2);
}

}  // namespace facecut
