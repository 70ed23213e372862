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

#include "facecut/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "facecut/errors.hpp"
#include "facecut/image.hpp"
#include "facecut/random.hpp"

namespace facecut {

namespace fs = std::filesystem;

std::string_view to_string(Label label) {
  return label == Label::with_mask ? "with_mask" : "without_mask";
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
    case Split::none: break;
  }
  return "";
}

std::string_view to_string(LandmarkOrigin origin) {
  switch (origin) {
    case LandmarkOrigin::predictor: return "predictor";
    case LandmarkOrigin::sidecar: return "sidecar";
    case LandmarkOrigin::none: break;
  }
  return "none";
}

std::optional<Label> parse_label(std::string_view text) {
  for (Label label : kLabels) {
    if (text == to_string(label)) return label;
  }
  return std::nullopt;
}

void SplitRatios::validate() const {
  if (train < 0 || val < 0 || test < 0) throw RatioError("split ratios must be non-negative");
  if (std::abs(train + val + test - 1.0) > 1e-9) throw RatioError("split ratios must sum to 1");
}

SplitSizes split_sizes(std::size_t count, const SplitRatios& ratios) {
  ratios.validate();
  SplitSizes sizes;
  const auto nearest = [&](double ratio) {
    return static_cast<std::size_t>(std::floor(static_cast<double>(count) * ratio + 0.5));
  };
  sizes.val = std::min(nearest(ratios.val), count);
  sizes.test = std::min(nearest(ratios.test), count - sizes.val);
  sizes.train = count - sizes.val - sizes.test;
  return sizes;
}

std::map<Label, std::size_t> DatasetManifest::class_counts() const {
  std::map<Label, std::size_t> counts;
  for (Label label : kLabels) counts[label] = 0;
  for (const auto& record : records) ++counts[record.label];
  return counts;
}

std::vector<const SampleRecord*> DatasetManifest::in_split(Split split) const {
  std::vector<const SampleRecord*> out;
  for (const auto& record : records) {
    if (record.split == split && record.has_file()) out.push_back(&record);
  }
  return out;
}

// Scanning -------------------------------------------------------------------

DatasetManifest scan_dataset(const fs::path& root) {
  if (!fs::is_directory(root)) throw LayoutError("not a directory: " + root.string());
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory() && !parse_label(entry.path().filename().string())) {
      throw LayoutError("unexpected directory " + entry.path().string() +
                        "; expected only with_mask and without_mask");
    }
  }
  DatasetManifest manifest;
  for (Label label : kLabels) {
    const fs::path dir = root / std::string(to_string(label));
    if (!fs::is_directory(dir)) throw LayoutError("missing class directory " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
      if (entry.is_regular_file() && is_image_file(entry.path())) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
      try {
        (void)load_rgb(file);
      } catch (const DecodeError& e) {
        spdlog::warn("skipping {}: {}", file.string(), e.what());
        continue;
      }
      SampleRecord record;
      record.path = file;
      record.source_path = file;
      record.label = label;
      manifest.records.push_back(std::move(record));
    }
  }
  if (manifest.records.empty()) throw EmptyDatasetError("no decodable images under " + root.string());
  return manifest;
}

// Splitting ------------------------------------------------------------------

DatasetManifest split_dataset(DatasetManifest manifest, std::uint64_t seed,
                              const SplitRatios& ratios) {
  ratios.validate();
  auto& records = manifest.records;
  std::stable_sort(records.begin(), records.end(), [](const SampleRecord& a, const SampleRecord& b) {
    return std::tie(a.source_path, a.path) < std::tie(b.source_path, b.path);
  });
  std::mt19937_64 rng(seed);
  for (Label label : kLabels) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (records[i].label == label && records[i].has_file()) members.push_back(i);
    }
    seeded_shuffle<std::size_t>(members, rng);
    const SplitSizes sizes = split_sizes(members.size(), ratios);
    for (std::size_t k = 0; k < members.size(); ++k) {
      records[members[k]].split = k < sizes.train                ? Split::train
                                  : k < sizes.train + sizes.val ? Split::val
                                                                : Split::test;
    }
  }
  for (auto& record : records) {
    if (!record.has_file()) record.split = Split::none;
  }
  manifest.seed = seed;
  manifest.ratios = ratios;
  return manifest;
}

// Preprocessing --------------------------------------------------------------

namespace {

LandmarkOrigin origin_of(const LandmarkProvider& provider) {
  return provider.source() == LandmarkSource::predictor ? LandmarkOrigin::predictor
                                                        : LandmarkOrigin::sidecar;
}

std::vector<SampleRecord> process_one(const SampleRecord& record, const LandmarkProvider& provider,
                                      const PreprocessOptions& options, const fs::path& output_dir) {
  const fs::path source = record.source_path.empty() ? record.path : record.source_path;
  const fs::path label_dir = output_dir / std::string(to_string(record.label));
  const SourceImage image = load_source_image(record.path);
  const std::vector<CutImage> cuts = cut_face(image, provider, options.cut);

  SampleRecord base = record;
  base.source_path = source;
  base.path.clear();
  base.face_found = false;
  base.landmark_source = LandmarkOrigin::none;

  if (cuts.empty()) return {base};
  if (cuts.front().passthrough) {
    SampleRecord copy = base;
    copy.path = label_dir / record.path.filename();
    fs::copy_file(record.path, copy.path, fs::copy_options::overwrite_existing);
    return {copy};
  }

  std::vector<SampleRecord> out;
  const std::string stem = record.path.stem().string();
  for (std::size_t k = 0; k < cuts.size(); ++k) {
    SampleRecord derived = base;
    derived.face_found = true;
    derived.landmark_source = origin_of(provider);
    derived.path = label_dir / (cuts.size() == 1 && options.cut.faces == FacePolicy::largest
                                    ? stem + ".png"
                                    : stem + "_face" + std::to_string(k) + ".png");
    save_rgb(derived.path, cuts[k].pixels);
    if (options.debug_overlay) {
      const fs::path debug_dir = output_dir / "debug" / std::string(to_string(record.label));
      fs::create_directories(debug_dir);
      save_rgb(debug_dir / (derived.path.stem().string() + ".overlay.png"),
               draw_boundary_overlay(image.pixels, cuts[k].boundary));
    }
    out.push_back(std::move(derived));
  }
  return out;
}

}  // namespace

DatasetManifest preprocess_dataset(const DatasetManifest& manifest, const LandmarkProvider& provider,
                                   const PreprocessOptions& options, const fs::path& output_dir) {
  DatasetManifest derived;
  derived.seed = manifest.seed;
  derived.ratios = manifest.ratios;
  if (manifest.records.empty()) return derived;

  std::set<fs::path> targets;
  for (const auto& record : manifest.records) {
    if (!record.has_file()) continue;
    std::error_code ec;
    if (fs::equivalent(record.path.parent_path(),
                       output_dir / std::string(to_string(record.label)), ec)) {
      throw IoError("output directory would overwrite source " + record.path.string());
    }
    const auto key = output_dir / std::string(to_string(record.label)) / record.path.stem();
    if (!targets.insert(key).second) {
      throw IoError("two sources map to the same derived name " + key.string());
    }
  }
  try {
    for (Label label : kLabels) fs::create_directories(output_dir / std::string(to_string(label)));
  } catch (const fs::filesystem_error& e) {
    throw IoError(std::string("cannot create output directory: ") + e.what());
  }

  const std::size_t count = manifest.records.size();
  std::vector<std::vector<SampleRecord>> results(count);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      const auto& record = manifest.records[i];
      if (!record.has_file()) {
        results[i] = {record};
        continue;
      }
      try {
        results[i] = process_one(record, provider, options, output_dir);
      } catch (const fs::filesystem_error& e) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::make_exception_ptr(IoError(e.what()));
        next = count;
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    }
  };
  unsigned threads = options.threads ? options.threads : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  for (auto& group : results) {
    for (auto& record : group) derived.records.push_back(std::move(record));
  }
  const auto found = std::count_if(derived.records.begin(), derived.records.end(),
                                   [](const SampleRecord& r) { return r.face_found; });
  spdlog::info("preprocessed {} sources into {} records ({} with a face)", count,
               derived.records.size(), found);
  return derived;
}

// Manifest I/O ---------------------------------------------------------------

namespace {

std::string csv_field(const std::string& value) {
  if (value.find_first_of(",\"\n\r") == std::string::npos) return value;
  std::string quoted = "\"";
  for (char c : value) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + '"';
}

std::vector<std::string> parse_csv_line(const std::string& line, const std::string& where) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else if (c != '\r') {
      fields.back() += c;
    }
  }
  if (quoted) throw ParseError(where + ": unterminated quote");
  return fields;
}

fs::path meta_path(const fs::path& manifest) {
  fs::path meta = manifest;
  meta += ".meta.json";
  return meta;
}

}  // namespace

void write_manifest(const fs::path& path, const DatasetManifest& manifest) {
  std::ostringstream out;
  out << kManifestHeader << '\n';
  for (const auto& r : manifest.records) {
    out << csv_field(r.path.string()) << ',' << to_string(r.label) << ',' << to_string(r.split)
        << ',' << (r.face_found ? "true" : "false") << ',' << to_string(r.landmark_source) << ','
        << csv_field(r.source_path.string()) << '\n';
  }
  {
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    file << out.str();
    if (!file) throw IoError("cannot write manifest " + path.string());
  }
  nlohmann::ordered_json meta;
  meta["seed"] = manifest.seed;
  meta["ratios"] = {manifest.ratios.train, manifest.ratios.val, manifest.ratios.test};
  nlohmann::ordered_json counts;
  for (const auto& [label, n] : manifest.class_counts()) counts[std::string(to_string(label))] = n;
  meta["class_counts"] = counts;
  std::ofstream meta_file(meta_path(path), std::ios::trunc);
  meta_file << meta.dump(2) << '\n';
  if (!meta_file) throw IoError("cannot write " + meta_path(path).string());
}

DatasetManifest read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path.string() + ": empty manifest");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kManifestHeader) throw ParseError(path.string() + ": unexpected header '" + line + "'");

  DatasetManifest manifest;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    const auto fields = parse_csv_line(line, where);
    if (fields.size() != 6) throw ParseError(where + ": expected 6 fields");
    SampleRecord record;
    record.path = fields[0];
    const auto label = parse_label(fields[1]);
    if (!label) throw LabelError(where + ": unknown label '" + fields[1] + "'");
    record.label = *label;
    if (fields[2].empty()) record.split = Split::none;
    else if (fields[2] == "train") record.split = Split::train;
    else if (fields[2] == "val") record.split = Split::val;
    else if (fields[2] == "test") record.split = Split::test;
    else throw ParseError(where + ": unknown split '" + fields[2] + "'");
    if (fields[3] == "true") record.face_found = true;
    else if (fields[3] == "false") record.face_found = false;
    else throw ParseError(where + ": face_found must be true or false");
    if (fields[4] == "none") record.landmark_source = LandmarkOrigin::none;
    else if (fields[4] == "predictor") record.landmark_source = LandmarkOrigin::predictor;
    else if (fields[4] == "sidecar") record.landmark_source = LandmarkOrigin::sidecar;
    else throw ParseError(where + ": unknown landmark_source '" + fields[4] + "'");
    record.source_path = fields[5];
    manifest.records.push_back(std::move(record));
  }

  std::ifstream meta_file(meta_path(path));
  if (meta_file) {
    try {
      const auto meta = nlohmann::json::parse(meta_file);
      manifest.seed = meta.at("seed").get<std::uint64_t>();
      const auto ratios = meta.at("ratios").get<std::vector<double>>();
      if (ratios.size() != 3) throw ParseError("ratios must have three entries");
      manifest.ratios = {ratios[0], ratios[1], ratios[2]};
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(meta_path(path).string() + ": " + e.what());
    }
  }
  return manifest;
}

}  // namespace facecut
