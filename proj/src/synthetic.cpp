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

#include "facecut/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <opencv2/imgproc.hpp>

#include "facecut/errors.hpp"

namespace facecut {

namespace fs = std::filesystem;
using std::numbers::pi;

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Point2d place(const FaceShape& s, double u, double v) {
  const double c = std::cos(s.rotation), sn = std::sin(s.rotation);
  const double dx = u * s.radius_x, dy = v * s.radius_y;
  return {s.center.x() + c * dx - sn * dy, s.center.y() + sn * dx + c * dy};
}

}  // namespace

FaceShape random_face_shape(std::mt19937_64& rng, int height, int width) {
  FaceShape s;
  const double scale = std::min(height, width);
  s.radius_x = uniform(rng, 0.26, 0.32) * scale;
  s.radius_y = s.radius_x * uniform(rng, 1.1, 1.3);
  const double margin_y = s.radius_y * 1.05 + 2;
  const double margin_x = s.radius_x * 1.05 + 2;
  s.center = {uniform(rng, margin_x, std::max(margin_x, width - margin_x)),
              uniform(rng, margin_y, std::max(margin_y, height - margin_y))};
  s.rotation = uniform(rng, -0.15, 0.15);
  return s;
}

std::vector<Point2d> plausible_landmarks(const FaceShape& shape, std::mt19937_64& rng) {
  std::vector<Point2d> p(kLandmarkCount);
  // Jaw: angles from pi down to 0 through the chin (y grows downwards).
  const double step = pi / 16;
  for (int i = 0; i <= 16; ++i) {
    const double jitter = (i == 0 || i == 16) ? 0.0 : uniform(rng, -0.3, 0.3) * step;
    const double angle = pi - i * step + jitter;
    p[i] = place(shape, std::cos(angle), std::sin(angle));
  }
  // Brows: 17-21 on the image-left side, 22-26 mirrored, raised in the middle.
  const double brow_level = uniform(rng, -0.62, -0.5);
  for (int k = 0; k < 5; ++k) {
    const double t = k / 4.0;
    const double u = -0.85 + 0.65 * t;
    const double lift = 0.08 * std::sin(pi * t);
    p[17 + k] = place(shape, u, brow_level - lift);
    p[26 - k] = place(shape, -u, brow_level - lift);
  }
  p[27] = place(shape, 0.0, brow_level + uniform(rng, 0.05, 0.12));
  for (int k = 1; k <= 3; ++k) p[27 + k] = place(shape, 0.0, brow_level + 0.12 + 0.12 * k);
  for (int k = 0; k < 5; ++k) p[31 + k] = place(shape, -0.2 + 0.1 * k, brow_level + 0.55);
  const double eye_level = brow_level + 0.22;
  for (int side = 0; side < 2; ++side) {
    const double cx = side == 0 ? -0.42 : 0.42;
    for (int k = 0; k < 6; ++k) {
      const double a = 2 * pi * k / 6;
      p[36 + 6 * side + k] = place(shape, cx + 0.15 * std::cos(a), eye_level + 0.06 * std::sin(a));
    }
  }
  const double mouth_level = 0.45;
  for (int k = 0; k < 13; ++k) {
    const double a = 2 * pi * k / 13;
    p[48 + k] = place(shape, 0.35 * std::cos(a), mouth_level + 0.12 * std::sin(a));
  }
  for (int k = 0; k < 7; ++k) {
    const double a = 2 * pi * k / 7;
    p[61 + k] = place(shape, 0.22 * std::cos(a), mouth_level + 0.05 * std::sin(a));
  }
  return p;
}

FaceBox bounding_box(std::span<const Point2d> points) {
  FaceBox box{points[0].x(), points[0].y(), points[0].x(), points[0].y()};
  for (const auto& q : points) {
    box.left = std::min(box.left, q.x());
    box.top = std::min(box.top, q.y());
    box.right = std::max(box.right, q.x());
    box.bottom = std::max(box.bottom, q.y());
  }
  box.left = std::floor(box.left);
  box.top = std::floor(box.top);
  box.right = std::ceil(box.right);
  box.bottom = std::ceil(box.bottom);
  return box;
}

SyntheticSample render_synthetic_sample(std::mt19937_64& rng, Label label, int size) {
  SyntheticSample sample;
  sample.label = label;
  const FaceShape shape = random_face_shape(rng, size, size);
  sample.face.points = plausible_landmarks(shape, rng);
  sample.face.box = bounding_box(sample.face.points);

  std::uniform_int_distribution<int> noise(0, 255);
  sample.image = RgbImage(size, size);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      sample.image(y, x) = cv::Vec3b(static_cast<std::uint8_t>(noise(rng)), static_cast<std::uint8_t>(noise(rng)),
                                     static_cast<std::uint8_t>(noise(rng)));
    }
  }
  // Grey, slightly noisy face disc.
  std::uniform_int_distribution<int> skin(110, 150);
  cv::Mat1b face_mask = cv::Mat1b::zeros(size, size);
  cv::ellipse(face_mask, cv::Point2d(shape.center.x(), shape.center.y()) , cv::Size2d(shape.radius_x * 1.02, shape.radius_y * 1.02),
              shape.rotation * 180 / pi, 0, 360, cv::Scalar(255), cv::FILLED);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      if (face_mask(y, x)) {
        const auto v = static_cast<std::uint8_t>(skin(rng));
        sample.image(y, x) = cv::Vec3b(v, v, v);
      }
    }
  }
  // Class block on the lower face.
  const int side = std::max(4, static_cast<int>(std::lround(shape.radius_x * uniform(rng, 0.7, 0.85))));
  const double cx = shape.center.x() + uniform(rng, -0.1, 0.1) * shape.radius_x;
  const double cy = shape.center.y() + uniform(rng, 0.2, 0.35) * shape.radius_y;
  sample.square = cv::Rect(static_cast<int>(std::lround(cx - side / 2.0)), static_cast<int>(std::lround(cy - side / 2.0)),
                           side, side) & cv::Rect(0, 0, size, size);
  const cv::Vec3b base = label == Label::with_mask ? cv::Vec3b(40, 90, 220) : cv::Vec3b(220, 60, 40);
  std::uniform_int_distribution<int> wobble(-20, 20);
  for (int y = sample.square.y; y < sample.square.y + sample.square.height; ++y) {
    for (int x = sample.square.x; x < sample.square.x + sample.square.width; ++x) {
      cv::Vec3b px;
      for (int c = 0; c < 3; ++c) px[c] = static_cast<std::uint8_t>(std::clamp(base[c] + wobble(rng), 0, 255));
      sample.image(y, x) = px;
    }
  }
  return sample;
}

std::vector<SyntheticEntry> generate_synthetic_dataset(const fs::path& root, int count, std::uint64_t seed, int size) {
  if (count < 0) throw InputError("count must be non-negative");
  for (Label label : kLabels) fs::create_directories(root / std::string(to_string(label)));
  std::mt19937_64 rng(seed);
  std::vector<SyntheticEntry> entries;
  for (int i = 0; i < count; ++i) {
    const Label label = (i % 2 == 0) ? Label::with_mask : Label::without_mask;
    SyntheticSample sample = render_synthetic_sample(rng, label, size);
    char name[32];
    std::snprintf(name, sizeof name, "sample_%05d.png", i);
    const fs::path image = root / std::string(to_string(label)) / name;
    save_rgb(image, sample.image);
    write_sidecar(sidecar_path_for(image), std::span<const SidecarFace>(&sample.face, 1));
    entries.push_back({image, label, sample.square});
  }
  return entries;
}

}  // namespace facecut
