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

#include <doctest.h>

#include <random>
#include <set>

#include "facecut/facecut.hpp"
#include "facecut/synthetic.hpp"
#include "oracles.hpp"

using namespace facecut;

namespace {

std::vector<Point2d> to_points(const std::vector<oracle::P>& poly) {
  std::vector<Point2d> out;
  for (const auto& p : poly) out.emplace_back(p.x, p.y);
  return out;
}

std::vector<oracle::P> to_oracle(std::span<const Point2d> pts) {
  std::vector<oracle::P> out;
  for (const auto& p : pts) out.push_back({p.x(), p.y()});
  return out;
}

int mismatches(const BinaryMask& mask, const std::vector<std::vector<int>>& expected) {
  int bad = 0;
  for (int r = 0; r < mask.rows(); ++r) {
    for (int c = 0; c < mask.cols(); ++c) bad += mask(r, c) != expected[r][c];
  }
  return bad;
}

RgbImage gradient_image(int h, int w) {
  RgbImage img(h, w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) img(r, c) = cv::Vec3b(r * 7 % 256, c * 11 % 256, (r + c) * 3 % 256);
  }
  return img;
}

LandmarkSet face_set(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return LandmarkSet(oracle::plausible_face(rng, 40 + 20 * u(rng), 40 + 20 * u(rng), 15 + 10 * u(rng),
                                            18 + 10 * u(rng), (u(rng) - 0.5) * 0.4),
                     LandmarkSource::sidecar);
}

}  // namespace

TEST_SUITE("facecut") {

TEST_CASE("segment predicates agree with the brute-force oracle") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> coord(0, 6);
  for (int trial = 0; trial < 5000; ++trial) {
    oracle::P q[4];
    for (auto& p : q) p = {double(coord(rng)), double(coord(rng))};
    const bool expected = oracle::segments_meet(q[0], q[1], q[2], q[3]);
    const bool got = segments_intersect<double>(Point2d(q[0].x, q[0].y), Point2d(q[1].x, q[1].y),
                                                Point2d(q[2].x, q[2].y), Point2d(q[3].x, q[3].y));
    REQUIRE(got == expected);
  }
}

TEST_CASE("simplicity check agrees with the oracle on small integer polygons") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> coord(0, 5), count(3, 7);
  int simple = 0;
  for (int trial = 0; trial < 3000; ++trial) {
    std::vector<oracle::P> poly(count(rng));
    for (auto& p : poly) p = {double(coord(rng)), double(coord(rng))};
    const auto pts = to_points(poly);
    REQUIRE(is_simple_polygon<double>(pts) == oracle::simple(poly));
    simple += oracle::simple(poly);
  }
  CHECK(simple > 100);
}

TEST_CASE("rectangle fill sets exactly the enclosed block") {
  const std::vector<Point2d> rect{{1, 1}, {4, 1}, {4, 4}, {1, 4}};
  const BinaryMask mask = rasterize_polygon<double>(rect, 6, 6);
  for (int r = 0; r < 6; ++r) {
    for (int c = 0; c < 6; ++c) {
      const bool in = r >= 1 && r <= 4 && c >= 1 && c <= 4;
      CHECK(mask(r, c) == (in ? 1 : 0));
    }
  }
}

TEST_CASE("triangle fill matches the point-in-polygon oracle") {
  const std::vector<oracle::P> tri{{0, 0}, {5, 0}, {0, 5}};
  const BinaryMask mask = rasterize_polygon<double>(to_points(tri), 8, 8);
  CHECK(mismatches(mask, oracle::fill(tri, 8, 8)) == 0);
  CHECK(mask.cast<int>().sum() == 21);
}

TEST_CASE("scanline fill equals the oracle on random polygons") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> dim(4, 40);
  for (int trial = 0; trial < 60; ++trial) {
    const int h = dim(rng), w = dim(rng);
    const auto poly = oracle::random_simple_polygon(rng, h, w, 28);
    CHECK(mismatches(rasterize_polygon<double>(to_points(poly), h, w), oracle::fill(poly, h, w)) == 0);
  }
}

TEST_CASE("float and double rasterization agree on quarter-pixel vertices") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const auto poly = oracle::random_simple_polygon(rng, 32, 32, 12);
    std::vector<Point2<float>> single;
    for (const auto& p : poly) single.emplace_back(float(p.x), float(p.y));
    CHECK((rasterize_polygon<float>(single, 32, 32) == rasterize_polygon<double>(to_points(poly), 32, 32)).all());
  }
}

TEST_CASE("degenerate outlines are rejected") {
  BoundaryPath path;
  path.points = {{1, 1}, {1, 1}, {3, 3}, {3, 3}};
  path.indices = {0, 1, 2, 3};
  CHECK_THROWS_AS(build_face_mask(path, 8, 8), DegeneratePolygonError);
  CHECK_THROWS_AS(rasterize_polygon<double>(std::span<const Point2d>{}, 0, 4), ShapeError);
}

TEST_CASE("boundary path order and index sets") {
  std::mt19937_64 rng(17);
  const LandmarkSet lm = face_set(rng);
  const BoundaryPath path = select_boundary_points(lm);
  const std::vector<std::size_t> expected{1,  2,  3,  4,  5,  6,  7,  8,  9,  10, 11, 12, 13, 14,
                                          15, 16, 26, 25, 24, 23, 22, 27, 21, 20, 19, 18, 17};
  CHECK(path.indices == expected);
  REQUIRE(path.size() == 27);
  for (std::size_t i = 0; i < path.size(); ++i) CHECK(path.points[i] == lm[path.indices[i]]);

  const BoundaryPath full = select_boundary_points(lm, true);
  CHECK(full.size() == 28);
  CHECK(full.indices.front() == 0);
  CHECK(std::multiset<std::size_t>(full.indices.begin(), full.indices.end()).count(0) == 1);
}

TEST_CASE("points placed on a circle give a simple outline") {
  std::vector<Point2d> pts(68, Point2d(50, 50));
  for (int i = 0; i <= 16; ++i) {
    const double a = std::numbers::pi - i * std::numbers::pi / 16;
    pts[i] = {50 + 30 * std::cos(a), 50 + 30 * std::sin(a)};
  }
  pts[27] = {50 + 30 * std::cos(1.5 * std::numbers::pi), 50 + 30 * std::sin(1.5 * std::numbers::pi)};
  // Brows on the upper arc: 17 leftmost through 26 rightmost, nasion at the top.
  for (int k = 0; k < 10; ++k) {
    const double a = std::numbers::pi + (k < 5 ? k + 0.5 : k + 1.5) * std::numbers::pi / 11;
    pts[17 + k] = {50 + 30 * std::cos(a), 50 + 30 * std::sin(a)};
  }
  const LandmarkSet lm(pts, LandmarkSource::sidecar);
  CHECK(oracle::simple(to_oracle(select_boundary_points(lm).points)));
  CHECK(oracle::simple(to_oracle(select_boundary_points(lm, true).points)));
}

TEST_CASE("clamping pulls predictor overshoot into the frame") {
  BoundaryPath path;
  path.points = {{-3, 2}, {10, -1}, {12.5, 9}, {4, 20}};
  path.indices = {1, 2, 3, 4};
  const BoundaryPath c = clamp_to_image(path, 10, 8);
  for (const auto& p : c.points) {
    CHECK(p.x() >= 0);
    CHECK(p.x() <= 7);
    CHECK(p.y() >= 0);
    CHECK(p.y() <= 9);
  }
  CHECK(c.points[0] == Point2d(0, 2));
}

TEST_CASE("apply_cut on the identity and single-cell masks") {
  const RgbImage img = gradient_image(5, 6);
  const CutImage all = apply_cut(img, BinaryMask::Ones(5, 6), Rgb{0, 0, 0});
  CHECK(all.top == 0);
  CHECK(all.left == 0);
  CHECK(cv::norm(all.pixels, img, cv::NORM_INF) == 0);

  BinaryMask one = BinaryMask::Zero(5, 6);
  one(2, 3) = 1;
  const CutImage px = apply_cut(img, one, Rgb{9, 9, 9});
  CHECK(px.pixels.rows == 1);
  CHECK(px.pixels.cols == 1);
  CHECK(px.top == 2);
  CHECK(px.left == 3);
  CHECK(px.pixels(0, 0) == img(2, 3));
}

TEST_CASE("rectangle cut matches a crop composed by direct indexing") {
  const RgbImage img = gradient_image(9, 9);
  const std::vector<Point2d> rect{{1, 1}, {4, 1}, {4, 4}, {1, 4}};
  const BinaryMask mask = rasterize_polygon<double>(rect, 9, 9);
  const CutImage cut = apply_cut(img, mask, Rgb{1, 2, 3});
  REQUIRE(cut.pixels.rows == 4);
  REQUIRE(cut.pixels.cols == 4);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) CHECK(cut.pixels(r, c) == img(r + 1, c + 1));
  }

  const std::vector<Point2d> tri{{1, 1}, {6, 1}, {1, 6}};
  const CutImage t = apply_cut(img, rasterize_polygon<double>(tri, 9, 9), Rgb{1, 2, 3});
  for (int r = 0; r < t.pixels.rows; ++r) {
    for (int c = 0; c < t.pixels.cols; ++c) {
      const bool in = (r + 1) + (c + 1) <= 7;
      CHECK(t.pixels(r, c) == (in ? img(r + 1, c + 1) : cv::Vec3b(1, 2, 3)));
    }
  }
}

TEST_CASE("apply_cut input errors") {
  const RgbImage img = gradient_image(4, 4);
  CHECK_THROWS_AS(apply_cut(img, BinaryMask::Ones(4, 5), Rgb{}), ShapeError);
  CHECK_THROWS_AS(apply_cut(img, BinaryMask::Zero(4, 4), Rgb{}), EmptyMaskError);
}

TEST_CASE("including point zero grows the mask when point zero is outside") {
  std::mt19937_64 rng(19);
  int checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const LandmarkSet lm = face_set(rng);
    const BoundaryPath small = select_boundary_points(lm);
    if (oracle::inside(to_oracle(small.points), lm[0].x(), lm[0].y())) continue;
    const BinaryMask a = build_face_mask(small, 100, 100);
    const BinaryMask b = build_face_mask(select_boundary_points(lm, true), 100, 100);
    CHECK(((a == 1) <= (b == 1)).all());
    ++checked;
  }
  CHECK(checked > 30);
}

TEST_CASE("masks and cuts are deterministic") {
  std::mt19937_64 rng(23);
  const LandmarkSet lm = face_set(rng);
  const BoundaryPath path = select_boundary_points(lm);
  CHECK((build_face_mask(path, 100, 100) == build_face_mask(path, 100, 100)).all());
}

TEST_CASE("boundary overlay leaves the source untouched") {
  std::mt19937_64 rng(29);
  const LandmarkSet lm = face_set(rng);
  const RgbImage img = gradient_image(100, 100);
  const RgbImage copy = img.clone();
  const RgbImage drawn = draw_boundary_overlay(img, select_boundary_points(lm));
  CHECK(cv::norm(img, copy, cv::NORM_INF) == 0);
  CHECK(cv::norm(drawn, img, cv::NORM_INF) > 0);
}

}  // TEST_SUITE
