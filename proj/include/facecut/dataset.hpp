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
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "facecut/facecut.hpp"
#include "facecut/landmarks.hpp"

namespace facecut {

/// Class labels in classifier index order.
enum class Label { without_mask, with_mask };
inline constexpr std::array<Label, 2> kLabels = {Label::without_mask, Label::with_mask};

enum class Split { none, train, val, test };

/// Which provider produced a derived sample; `none` for raw or uncut samples.
enum class LandmarkOrigin { none, predictor, sidecar };

std::string_view to_string(Label label);
std::string_view to_string(Split split);
std::string_view to_string(LandmarkOrigin origin);
std::optional<Label> parse_label(std::string_view text);

struct SampleRecord {
  std::filesystem::path path;  ///< empty when preprocessing produced no file
  Label label = Label::without_mask;
  Split split = Split::none;
  bool face_found = false;
  LandmarkOrigin landmark_source = LandmarkOrigin::none;
  std::filesystem::path source_path;

  bool has_file() const { return !path.empty(); }
  bool passthrough() const { return has_file() && !face_found && path != source_path; }

  friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

struct SplitRatios {
  double train = 0.6;
  double val = 0.2;
  double test = 0.2;

  /// Throws RatioError on a negative entry or a sum off 1 by more than 1e-9.
  void validate() const;
};

/// Per-class split sizes: val and test are rounded to nearest, train takes
/// the rest.
struct SplitSizes {
  std::size_t train = 0;
  std::size_t val = 0;
  std::size_t test = 0;
};
SplitSizes split_sizes(std::size_t count, const SplitRatios& ratios);

struct DatasetManifest {
  std::vector<SampleRecord> records;
  std::uint64_t seed = 0;
  SplitRatios ratios;

  std::map<Label, std::size_t> class_counts() const;
  std::vector<const SampleRecord*> in_split(Split split) const;
};

inline constexpr std::string_view kManifestHeader =
    "path,label,split,face_found,landmark_source,source_path";

/// Expects exactly the `with_mask` and `without_mask` directories under
/// `root`. Undecodable images are skipped with a warning.
DatasetManifest scan_dataset(const std::filesystem::path& root);

/// Stratified, seeded assignment over records sorted by source path. Records
/// without a file stay unassigned.
DatasetManifest split_dataset(DatasetManifest manifest, std::uint64_t seed,
                              const SplitRatios& ratios = {});

struct PreprocessOptions {
  FaceCutOptions cut;
  bool debug_overlay = false;
  unsigned threads = 0;  ///< 0 picks the hardware concurrency
};

/// Cuts every record into a mirrored `<output_dir>/<label>/` tree. Split
/// assignments carry over to derived records.
DatasetManifest preprocess_dataset(const DatasetManifest& manifest,
                                   const LandmarkProvider& provider,
                                   const PreprocessOptions& options,
                                   const std::filesystem::path& output_dir);

/// CSV with the fixed header, plus `<path>.meta.json` holding seed and ratios.
void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);
DatasetManifest read_manifest(const std::filesystem::path& path);

}  // namespace facecut
