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

#include <array>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <mutex>
#include <span>
#include <string_view>
#include <vector>

#include "facecut/geometry.hpp"
#include "facecut/image.hpp"

namespace facecut {

class ShapePredictor;

enum class LandmarkSource { predictor, sidecar };

std::string_view to_string(LandmarkSource source);

/// Face rectangle in pixel coordinates, corners inclusive.
struct FaceBox {
  double left = 0;
  double top = 0;
  double right = 0;
  double bottom = 0;

  double width() const { return right - left; }
  double height() const { return bottom - top; }
  double area() const { return width() * height(); }
  bool valid() const { return left < right && top < bottom; }

  friend bool operator==(const FaceBox&, const FaceBox&) = default;
};

inline constexpr std::size_t kLandmarkCount = 68;

/// Named landmark groups of the 68-point scheme, 0-based and inclusive.
enum class Region { jaw, right_brow, left_brow, nose, right_eye, left_eye, mouth, lips };

struct IndexRange {
  std::size_t first;
  std::size_t last;
  std::size_t size() const { return last - first + 1; }
};

inline constexpr std::array<Region, 8> kRegions = {
    Region::jaw,       Region::right_brow, Region::left_brow, Region::nose,
    Region::right_eye, Region::left_eye,   Region::mouth,     Region::lips};

constexpr IndexRange region_range(Region region) {
  switch (region) {
    case Region::jaw: return {0, 16};
    case Region::right_brow: return {17, 21};
    case Region::left_brow: return {22, 26};
    case Region::nose: return {27, 35};
    case Region::right_eye: return {36, 41};
    case Region::left_eye: return {42, 47};
    case Region::mouth: return {48, 60};
    case Region::lips: return {61, 67};
  }
  return {0, 0};
}

/// Exactly 68 ordered points. Coordinates may fall outside the image; users
/// clamp where they need to.
class LandmarkSet {
 public:
  /// Throws AnnotationFormatError unless `points` has 68 finite entries.
  LandmarkSet(std::vector<Point2d> points, LandmarkSource source);

  const Point2d& operator[](std::size_t index) const { return points_[index]; }
  std::span<const Point2d> points() const { return points_; }
  std::span<const Point2d> region(Region region) const;
  LandmarkSource source() const { return source_; }

  friend bool operator==(const LandmarkSet& a, const LandmarkSet& b) {
    return a.source_ == b.source_ && a.points_ == b.points_;
  }

 private:
  std::vector<Point2d> points_;
  LandmarkSource source_;
};

class LandmarkProvider {
 public:
  virtual ~LandmarkProvider() = default;

  /// Deterministically ordered face boxes. Throws DecodeError on an empty image.
  virtual std::vector<FaceBox> detect_faces(const SourceImage& image) const = 0;
  virtual LandmarkSet detect_landmarks(const SourceImage& image,
                                       const FaceBox& box) const = 0;
  virtual LandmarkSource source() const = 0;
};

// Sidecar annotations ------------------------------------------------------

/// One annotated face: a "facebox left top right bottom" header followed by
/// 68 "index x y" lines.
struct SidecarFace {
  FaceBox box;
  std::vector<Point2d> points;
};

/// `<image-stem>.landmarks.txt` in the image's directory.
std::filesystem::path sidecar_path_for(const std::filesystem::path& image);

/// Missing file means no faces. Malformed content throws AnnotationFormatError.
std::vector<SidecarFace> read_sidecar(const std::filesystem::path& path);

/// Writes shortest round-trip decimal text so reading back is bit-exact.
void write_sidecar(const std::filesystem::path& path,
                   std::span<const SidecarFace> faces);

class SidecarProvider final : public LandmarkProvider {
 public:
  std::vector<FaceBox> detect_faces(const SourceImage& image) const override;
  LandmarkSet detect_landmarks(const SourceImage& image,
                               const FaceBox& box) const override;
  LandmarkSource source() const override { return LandmarkSource::sidecar; }
};

// Learned predictor ----------------------------------------------------------

enum class DetectorKind { cascade, full_image };

struct PredictorSettings {
  std::filesystem::path predictor_path;
  DetectorKind detector = DetectorKind::cascade;
  std::filesystem::path detector_path;
  int min_face_size = 30;
};

/// 68-point regression-tree predictor fed by a face detector. With
/// `full_image` the whole frame is one face unless the frame is uniform.
class PredictorProvider final : public LandmarkProvider {
 public:
  /// Throws ProviderInitError when a model file is missing or corrupt.
  explicit PredictorProvider(const PredictorSettings& settings);
  ~PredictorProvider() override;

  std::vector<FaceBox> detect_faces(const SourceImage& image) const override;
  LandmarkSet detect_landmarks(const SourceImage& image,
                               const FaceBox& box) const override;
  LandmarkSource source() const override { return LandmarkSource::predictor; }

 private:
  struct Detector;
  std::unique_ptr<ShapePredictor> predictor_;
  std::unique_ptr<Detector> detector_;
  PredictorSettings settings_;
};

}  // namespace facecut
