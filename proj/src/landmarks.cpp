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

#include "facecut/landmarks.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include <opencv2/imgproc.hpp>
#include <opencv2/objdetect.hpp>

#include "facecut/errors.hpp"
#include "facecut/shape_predictor.hpp"

namespace facecut {

std::string_view to_string(LandmarkSource source) {
  return source == LandmarkSource::predictor ? "predictor" : "sidecar";
}

LandmarkSet::LandmarkSet(std::vector<Point2d> points, LandmarkSource source)
    : points_(std::move(points)), source_(source) {
  if (points_.size() != kLandmarkCount) {
    throw AnnotationFormatError("expected 68 landmarks, got " +
                                std::to_string(points_.size()));
  }
  for (const auto& p : points_) {
    if (!p.allFinite()) throw AnnotationFormatError("non-finite landmark");
  }
}

std::span<const Point2d> LandmarkSet::region(Region region) const {
  const IndexRange range = region_range(region);
  return std::span<const Point2d>(points_).subspan(range.first, range.size());
}

// Sidecar ------------------------------------------------------------------

std::filesystem::path sidecar_path_for(const std::filesystem::path& image) {
  auto path = image;
  path.replace_filename(image.stem().string() + ".landmarks.txt");
  return path;
}

namespace {

std::vector<std::string_view> split_words(std::string_view line) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) words.push_back(line.substr(start, i - start));
  }
  return words;
}

template <typename T>
T parse_number(std::string_view word, const std::string& where) {
  T value{};
  const auto [ptr, ec] = std::from_chars(word.data(), word.data() + word.size(), value);
  if (ec != std::errc{} || ptr != word.data() + word.size()) {
    throw AnnotationFormatError(where + ": bad number '" + std::string(word) + "'");
  }
  return value;
}

void finish_face(std::vector<SidecarFace>& faces, std::vector<bool>& seen,
                 const std::string& where) {
  if (faces.empty()) return;
  const std::size_t count =
      static_cast<std::size_t>(std::count(seen.begin(), seen.end(), true));
  if (count != kLandmarkCount) {
    throw AnnotationFormatError(where + ": face " + std::to_string(faces.size()) +
                                " lists " + std::to_string(count) +
                                " points, expected 68");
  }
}

void append_number(std::string& out, double value) {
  char buf[32];
  const auto result = std::to_chars(buf, buf + sizeof buf, value);
  out.append(buf, result.ptr);
}

}  // namespace

std::vector<SidecarFace> read_sidecar(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) return {};
  std::vector<SidecarFace> faces;
  std::vector<bool> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    const auto words = split_words(line);
    if (words.empty() || words.front().front() == '#') continue;
    if (words.front() == "facebox") {
      finish_face(faces, seen, path.string());
      if (words.size() != 5) throw AnnotationFormatError(where + ": facebox needs 4 values");
      FaceBox box{parse_number<double>(words[1], where), parse_number<double>(words[2], where),
                  parse_number<double>(words[3], where), parse_number<double>(words[4], where)};
      if (!box.valid()) throw AnnotationFormatError(where + ": empty facebox");
      faces.push_back({box, std::vector<Point2d>(kLandmarkCount, Point2d::Zero())});
      seen.assign(kLandmarkCount, false);
      continue;
    }
    if (faces.empty()) throw AnnotationFormatError(where + ": point before facebox header");
    if (words.size() != 3) throw AnnotationFormatError(where + ": expected 'index x y'");
    const auto index = parse_number<std::size_t>(words[0], where);
    if (index >= kLandmarkCount) {
      throw AnnotationFormatError(where + ": landmark index out of range");
    }
    if (seen[index]) throw AnnotationFormatError(where + ": duplicate landmark index");
    seen[index] = true;
    faces.back().points[index] =
        Point2d(parse_number<double>(words[1], where), parse_number<double>(words[2], where));
  }
  finish_face(faces, seen, path.string());
  return faces;
}

void write_sidecar(const std::filesystem::path& path,
                   std::span<const SidecarFace> faces) {
  std::string text;
  for (const auto& face : faces) {
    if (face.points.size() != kLandmarkCount) {
      throw AnnotationFormatError("sidecar faces need 68 points");
    }
    text += "facebox";
    for (double v : {face.box.left, face.box.top, face.box.right, face.box.bottom}) {
      text += ' ';
      append_number(text, v);
    }
    text += '\n';
    for (std::size_t i = 0; i < face.points.size(); ++i) {
      text += std::to_string(i);
      text += ' ';
      append_number(text, face.points[i].x());
      text += ' ';
      append_number(text, face.points[i].y());
      text += '\n';
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw IoError("cannot write " + path.string());
}

namespace {

void require_pixels(const SourceImage& image) {
  if (image.pixels.empty()) {
    throw DecodeError("empty image " + image.path.string());
  }
}

}  // namespace

std::vector<FaceBox> SidecarProvider::detect_faces(const SourceImage& image) const {
  require_pixels(image);
  std::vector<FaceBox> boxes;
  for (const auto& face : read_sidecar(sidecar_path_for(image.path))) {
    boxes.push_back(face.box);
  }
  return boxes;
}

LandmarkSet SidecarProvider::detect_landmarks(const SourceImage& image,
                                              const FaceBox& box) const {
  require_pixels(image);
  if (!box.valid()) throw InputError("invalid face box");
  for (auto& face : read_sidecar(sidecar_path_for(image.path))) {
    if (face.box == box) return LandmarkSet(std::move(face.points), LandmarkSource::sidecar);
  }
  throw InputError("no sidecar annotation for the requested box in " +
                   image.path.string());
}

// Predictor ----------------------------------------------------------------

struct PredictorProvider::Detector {
  // detectMultiScale mutates internal buffers.
  mutable std::mutex mutex;
  mutable cv::CascadeClassifier cascade;
};

PredictorProvider::PredictorProvider(const PredictorSettings& settings)
    : settings_(settings) {
  if (settings.predictor_path.empty()) {
    throw ProviderInitError("landmarks.predictor_path is not set");
  }
  predictor_ = std::make_unique<ShapePredictor>(ShapePredictor::load(settings.predictor_path));
  if (predictor_->landmark_count() != kLandmarkCount) {
    throw ProviderInitError("shape predictor emits " +
                            std::to_string(predictor_->landmark_count()) +
                            " points, expected 68");
  }
  if (settings.detector == DetectorKind::cascade) {
    if (settings.detector_path.empty()) {
      throw ProviderInitError("landmarks.detector_path is not set");
    }
    detector_ = std::make_unique<Detector>();
    bool loaded = false;
    try {
      loaded = detector_->cascade.load(settings.detector_path.string());
    } catch (const cv::Exception&) {
      loaded = false;
    }
    if (!loaded) {
      throw ProviderInitError("cannot load face detector " + settings.detector_path.string());
    }
  }
}

PredictorProvider::~PredictorProvider() = default;

std::vector<FaceBox> PredictorProvider::detect_faces(const SourceImage& image) const {
  require_pixels(image);
  const RgbImage& pixels = image.pixels;
  if (!detector_) {
    double lo = 0;
    double hi = 0;
    cv::minMaxLoc(pixels.reshape(1), &lo, &hi);
    if (lo == hi) return {};
    return {FaceBox{0, 0, static_cast<double>(pixels.cols - 1),
                    static_cast<double>(pixels.rows - 1)}};
  }
  cv::Mat gray;
  cv::cvtColor(pixels, gray, cv::COLOR_RGB2GRAY);
  cv::equalizeHist(gray, gray);
  std::vector<cv::Rect> rects;
  {
    std::lock_guard lock(detector_->mutex);
    detector_->cascade.detectMultiScale(
        gray, rects, 1.1, 3, 0, cv::Size(settings_.min_face_size, settings_.min_face_size));
  }
  std::sort(rects.begin(), rects.end(), [](const cv::Rect& a, const cv::Rect& b) {
    return std::tie(a.y, a.x, a.width, a.height) < std::tie(b.y, b.x, b.width, b.height);
  });
  std::vector<FaceBox> boxes;
  for (const auto& r : rects) {
    if (r.width < 2 || r.height < 2) continue;
    boxes.push_back(FaceBox{static_cast<double>(r.x), static_cast<double>(r.y),
                            static_cast<double>(r.x + r.width - 1),
                            static_cast<double>(r.y + r.height - 1)});
  }
  return boxes;
}

LandmarkSet PredictorProvider::detect_landmarks(const SourceImage& image,
                                                const FaceBox& box) const {
  require_pixels(image);
  if (!box.valid()) throw InputError("invalid face box");
  return LandmarkSet(predictor_->predict(image.pixels, box), LandmarkSource::predictor);
}

}  // namespace facecut
