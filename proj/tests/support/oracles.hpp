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

// Brute-force reference implementations used to check the production code.
// They favour obviousness over speed and share no code with the library.
#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace oracle {

struct P {
  double x;
  double y;
};

inline double orient(P a, P b, P c) { return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x); }

inline bool within(double v, double a, double b) { return std::min(a, b) <= v && v <= std::max(a, b); }

inline bool on_edge(P p, P a, P b) {
  return orient(a, b, p) == 0 && within(p.x, a.x, b.x) && within(p.y, a.y, b.y);
}

/// Even-odd membership of (x, y) with points on an edge counted as inside.
/// Crossings are decided with exact orientation signs, which is exact for
/// dyadic coordinates of small magnitude.
inline bool inside(const std::vector<P>& poly, double x, double y) {
  const P p{x, y};
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (on_edge(p, poly[i], poly[(i + 1) % n])) return true;
  }
  bool in = false;
  for (std::size_t i = 0; i < n; ++i) {
    P a = poly[i], b = poly[(i + 1) % n];
    if ((a.y > y) == (b.y > y)) continue;
    if (a.y > b.y) std::swap(a, b);
    // Edge runs upwards from a to b; the ray to +x crosses it when p lies
    // strictly left of the directed edge.
    if (orient(a, b, p) > 0) in = !in;
  }
  return in;
}

/// Cell-by-cell rasterization of `inside` at pixel centres (c, r).
inline std::vector<std::vector<int>> fill(const std::vector<P>& poly, int height, int width) {
  std::vector<std::vector<int>> grid(height, std::vector<int>(width, 0));
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) grid[r][c] = inside(poly, c, r) ? 1 : 0;
  }
  return grid;
}

/// Closed-segment intersection including touching and collinear overlap.
inline bool segments_meet(P a, P b, P c, P d) {
  const double d1 = orient(c, d, a), d2 = orient(c, d, b), d3 = orient(a, b, c), d4 = orient(a, b, d);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
  return on_edge(a, c, d) || on_edge(b, c, d) || on_edge(c, a, b) || on_edge(d, a, b);
}

/// Pairwise check over all edges: non-adjacent edges may not meet, adjacent
/// edges may only share their common vertex.
inline bool simple(const std::vector<P>& poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const P a = poly[i], b = poly[(i + 1) % n];
    if (a.x == b.x && a.y == b.y) return false;
    for (std::size_t j = i + 1; j < n; ++j) {
      const P c = poly[j], d = poly[(j + 1) % n];
      const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      if (!adjacent) {
        if (segments_meet(a, b, c, d)) return false;
        continue;
      }
      // Shared vertex is fine; folding back onto the other edge is not.
      const P shared = (j == i + 1) ? b : a;
      const P other_ab = (j == i + 1) ? a : b;
      const P other_cd = (j == i + 1) ? d : c;
      if (orient(shared, other_ab, other_cd) == 0 &&
          (other_ab.x - shared.x) * (other_cd.x - shared.x) + (other_ab.y - shared.y) * (other_cd.y - shared.y) > 0) {
        return false;
      }
    }
  }
  return true;
}

/// Star-shaped polygon around a random centre with coordinates snapped to a
/// 1/4 grid inside [0, width-1] x [0, height-1]; retried until simple.
inline std::vector<P> random_simple_polygon(std::mt19937_64& rng, int height, int width, int max_vertices) {
  std::uniform_int_distribution<int> count(3, max_vertices);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (;;) {
    const int n = count(rng);
    const double cx = 1 + unit(rng) * (width - 3), cy = 1 + unit(rng) * (height - 3);
    std::vector<double> angles(n);
    for (double& a : angles) a = unit(rng) * 2 * std::numbers::pi;
    std::sort(angles.begin(), angles.end());
    std::vector<P> poly;
    for (double a : angles) {
      const double reach = std::max(width, height) * (0.1 + 0.6 * unit(rng));
      auto snap = [](double v, double hi) { return std::clamp(std::round(v * 4) / 4, 0.0, hi); };
      poly.push_back({snap(cx + reach * std::cos(a), width - 1), snap(cy + reach * std::sin(a), height - 1)});
    }
    if (simple(poly)) return poly;
  }
}

/// 68 points with the jaw on the lower arc of a rotated ellipse (evenly
/// spaced angles with jitter), brows above the centre line and inside the
/// jaw's horizontal extent, the nasion between the inner brow ends, and the
/// remaining points scattered inside the face.
inline std::vector<Eigen::Vector2d> plausible_face(std::mt19937_64& rng, double cx, double cy, double rx,
                                                   double ry, double rotation) {
  using std::numbers::pi;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Eigen::Vector2d> local(68);
  for (int i = 0; i <= 16; ++i) {
    const double jitter = (i == 0 || i == 16) ? 0.0 : (unit(rng) - 0.5) * 0.5 * pi / 16;
    const double a = pi - i * pi / 16 + jitter;
    local[i] = {std::cos(a), std::sin(a)};
  }
  // Outer brow ends stay inside the outermost jaw points used by the path.
  const double reach = std::min(-local[1].x(), local[16].x()) * 0.95;
  const double inner = 0.08 + 0.1 * unit(rng);
  for (int k = 0; k < 5; ++k) {
    const double t = k / 4.0;
    const double xr = reach - (reach - inner) * t;  // from outer to inner
    local[26 - k] = {xr, -0.25 - 0.6 * unit(rng)};
    local[17 + k] = {-(reach - (reach - inner) * t), -0.25 - 0.6 * unit(rng)};
  }
  local[27] = {(unit(rng) - 0.5) * inner, -0.1 - 0.5 * unit(rng)};
  for (int i = 28; i < 68; ++i) local[i] = {(unit(rng) - 0.5) * 1.2, (unit(rng) - 0.3) * 1.2};

  const double c = std::cos(rotation), s = std::sin(rotation);
  std::vector<Eigen::Vector2d> out(68);
  for (int i = 0; i < 68; ++i) {
    const double dx = local[i].x() * rx, dy = local[i].y() * ry;
    out[i] = {cx + c * dx - s * dy, cy + s * dx + c * dy};
  }
  return out;
}

/// Fresh, empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("facecut_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Relative error with an absolute floor for values near zero.
inline double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

}  // namespace oracle
