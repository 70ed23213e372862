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

#include "facecut/shape_predictor.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include <Eigen/Geometry>
#include <opencv2/core.hpp>

#include "facecut/errors.hpp"

namespace facecut {
namespace {

// dlib's portable integer encoding: a control byte holding the byte count in
// the low nibble and the sign in 0x80, then the magnitude little-endian.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  template <typename Int>
  Int integer() {
    const int control = in_.get();
    if (control == std::char_traits<char>::eof()) fail("unexpected end of file");
    const unsigned size = static_cast<unsigned>(control) & 0x0F;
    const bool negative = (control & 0x80) != 0;
    if (size > sizeof(Int) || (control & 0x70) != 0) fail("bad integer encoding");
    if (negative && !std::numeric_limits<Int>::is_signed) {
      fail("negative value for unsigned field");
    }
    std::uint64_t magnitude = 0;
    for (unsigned i = 0; i < size; ++i) {
      const int byte = in_.get();
      if (byte == std::char_traits<char>::eof()) fail("unexpected end of file");
      magnitude |= static_cast<std::uint64_t>(byte & 0xFF) << (8 * i);
    }
    if (negative) return static_cast<Int>(-static_cast<std::int64_t>(magnitude));
    return static_cast<Int>(magnitude);
  }

  float real() {
    // Files from older releases store floats as text terminated by a space.
    // The binary form begins with a control byte, which never has 0x70 bits.
    const int peek = in_.peek();
    if (peek == std::char_traits<char>::eof()) fail("unexpected end of file");
    if ((peek & 0x70) != 0) return legacy_real();
    const auto mantissa = integer<std::int64_t>();
    const auto exponent = integer<std::int16_t>();
    constexpr std::int16_t kInf = 32000;
    constexpr std::int16_t kNegInf = 32001;
    constexpr std::int16_t kNan = 32002;
    switch (exponent) {
      case kInf: return std::numeric_limits<float>::infinity();
      case kNegInf: return -std::numeric_limits<float>::infinity();
      case kNan: return std::numeric_limits<float>::quiet_NaN();
      default:
        return static_cast<float>(
            std::ldexp(static_cast<double>(mantissa), exponent));
    }
  }

  template <typename T, typename ReadOne>
  std::vector<T> sequence(ReadOne&& read_one) {
    const auto size = integer<std::uint64_t>();
    if (size > (1ULL << 28)) fail("implausible sequence length");
    std::vector<T> items;
    items.reserve(size);
    for (std::uint64_t i = 0; i < size; ++i) items.push_back(read_one());
    return items;
  }

  Eigen::VectorXf column() {
    auto rows = integer<std::int64_t>();
    auto cols = integer<std::int64_t>();
    if (rows < 0 || cols < 0) {
      rows = -rows;
      cols = -cols;
    }
    const std::int64_t count = rows * cols;
    if (count < 0 || count > (1LL << 28)) fail("implausible matrix size");
    Eigen::VectorXf values(count);
    for (std::int64_t i = 0; i < count; ++i) values(i) = real();
    return values;
  }

  [[noreturn]] static void fail(const std::string& what) {
    throw ProviderInitError("corrupt shape predictor: " + what);
  }

 private:
  float legacy_real() {
    std::string token;
    for (int c = in_.get(); c != ' '; c = in_.get()) {
      if (c == std::char_traits<char>::eof() || token.size() > 64) {
        fail("bad legacy float");
      }
      token.push_back(static_cast<char>(c));
    }
    if (token == "inf") return std::numeric_limits<float>::infinity();
    if (token == "ninf") return -std::numeric_limits<float>::infinity();
    if (token == "nan") return std::numeric_limits<float>::quiet_NaN();
    try {
      std::size_t used = 0;
      const float value = std::stof(token, &used);
      if (used != token.size()) fail("bad legacy float");
      return value;
    } catch (const std::logic_error&) {
      fail("bad legacy float");
    }
  }

  std::istream& in_;
};

// Maps the unit square onto the detection rectangle.
Eigen::Vector2d to_image(const FaceBox& box, const Eigen::Vector2f& p) {
  return {box.left + static_cast<double>(p.x()) * (box.right - box.left),
          box.top + static_cast<double>(p.y()) * (box.bottom - box.top)};
}

Eigen::Vector2f location(const Eigen::VectorXf& shape, std::size_t i) {
  return shape.segment<2>(static_cast<Eigen::Index>(2 * i));
}

// Rotation and scale of the least-squares similarity taking `from` to `to`.
Eigen::Matrix2f similarity_between(const Eigen::VectorXf& from,
                                   const Eigen::VectorXf& to) {
  const Eigen::Index n = from.size() / 2;
  if (n < 2) return Eigen::Matrix2f::Identity();
  const Eigen::Map<const Eigen::Matrix2Xf> src(from.data(), 2, n);
  const Eigen::Map<const Eigen::Matrix2Xf> dst(to.data(), 2, n);
  const Eigen::Matrix3f tform = Eigen::umeyama(src, dst, true);
  return tform.topLeftCorner<2, 2>();
}

}  // namespace

ShapePredictor ShapePredictor::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ProviderInitError("cannot open shape predictor " + path.string());
  }
  return read(in);
}

ShapePredictor ShapePredictor::read(std::istream& in) {
  Reader reader(in);
  ShapePredictor model;
  if (reader.integer<std::int32_t>() != 1) Reader::fail("unsupported version");
  model.initial_shape_ = reader.column();
  model.forests_ = reader.sequence<std::vector<Tree>>([&] {
    return reader.sequence<Tree>([&] {
      Tree tree;
      tree.splits = reader.sequence<Split>([&] {
        Split split;
        split.idx1 = reader.integer<std::uint64_t>();
        split.idx2 = reader.integer<std::uint64_t>();
        split.thresh = reader.real();
        return split;
      });
      tree.leaves =
          reader.sequence<Eigen::VectorXf>([&] { return reader.column(); });
      return tree;
    });
  });
  model.anchor_idx_ = reader.sequence<std::vector<std::uint64_t>>([&] {
    return reader.sequence<std::uint64_t>(
        [&] { return reader.integer<std::uint64_t>(); });
  });
  model.deltas_ = reader.sequence<std::vector<Eigen::Vector2f>>([&] {
    return reader.sequence<Eigen::Vector2f>([&] {
      const float x = reader.real();
      const float y = reader.real();
      return Eigen::Vector2f(x, y);
    });
  });

  const auto shape_size = model.initial_shape_.size();
  if (shape_size < 2 || shape_size % 2 != 0) Reader::fail("bad initial shape");
  const std::size_t levels = model.forests_.size();
  if (model.anchor_idx_.size() != levels || model.deltas_.size() != levels) {
    Reader::fail("cascade tables disagree in length");
  }
  for (std::size_t level = 0; level < levels; ++level) {
    const std::size_t features = model.deltas_[level].size();
    if (model.anchor_idx_[level].size() != features) {
      Reader::fail("anchor and delta tables disagree in length");
    }
    for (auto anchor : model.anchor_idx_[level]) {
      if (anchor >= model.landmark_count()) Reader::fail("anchor out of range");
    }
    for (const Tree& tree : model.forests_[level]) {
      if (tree.leaves.size() != tree.splits.size() + 1) {
        Reader::fail("tree is not complete");
      }
      for (const Split& split : tree.splits) {
        if (split.idx1 >= features || split.idx2 >= features) {
          Reader::fail("split feature out of range");
        }
      }
      for (const auto& leaf : tree.leaves) {
        if (leaf.size() != shape_size) Reader::fail("leaf size mismatch");
      }
    }
  }
  return model;
}

std::vector<Point2d> ShapePredictor::predict(const RgbImage& image,
                                             const FaceBox& box) const {
  cv::Mat1b intensity(image.rows, image.cols);
  for (int r = 0; r < image.rows; ++r) {
    for (int c = 0; c < image.cols; ++c) {
      const cv::Vec3b& px = image(r, c);
      intensity(r, c) = static_cast<std::uint8_t>(
          (static_cast<unsigned>(px[0]) + px[1] + px[2]) / 3);
    }
  }

  Eigen::VectorXf shape = initial_shape_;
  std::vector<float> features;
  for (std::size_t level = 0; level < forests_.size(); ++level) {
    const Eigen::Matrix2f tform = similarity_between(initial_shape_, shape);
    const auto& anchors = anchor_idx_[level];
    const auto& deltas = deltas_[level];
    features.assign(deltas.size(), 0.0f);
    for (std::size_t i = 0; i < deltas.size(); ++i) {
      const Eigen::Vector2f normalized =
          tform * deltas[i] + location(shape, anchors[i]);
      const Eigen::Vector2d p = to_image(box, normalized);
      const long x = std::lround(p.x());
      const long y = std::lround(p.y());
      if (x >= 0 && y >= 0 && x < image.cols && y < image.rows) {
        features[i] = intensity(static_cast<int>(y), static_cast<int>(x));
      }
    }
    for (const Tree& tree : forests_[level]) {
      std::size_t node = 0;
      while (node < tree.splits.size()) {
        const Split& split = tree.splits[node];
        node = (features[split.idx1] - features[split.idx2] > split.thresh)
                   ? 2 * node + 1
                   : 2 * node + 2;
      }
      shape += tree.leaves[node - tree.splits.size()];
    }
  }

  std::vector<Point2d> points(landmark_count());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Eigen::Vector2d p = to_image(box, location(shape, i));
    points[i] = Point2d(std::round(p.x()), std::round(p.y()));
  }
  return points;
}

}  // namespace facecut
