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

#include <cstdint>
#include <filesystem>
#include <memory>

#include <nlohmann/json.hpp>

#include "facecut/classifier.hpp"
#include "facecut/dataset.hpp"
#include "facecut/facecut.hpp"
#include "facecut/landmarks.hpp"

namespace facecut {

enum class ProviderKind { sidecar, predictor };

struct LandmarkSettings {
  ProviderKind provider = ProviderKind::sidecar;
  PredictorSettings predictor;
};

struct ReportSettings {
  std::filesystem::path dir = "reports";
};

/// Everything a pipeline run needs. Precedence is built-in defaults, then
/// the config file, then command-line flags.
struct PipelineConfig {
  LandmarkSettings landmarks;
  FaceCutOptions facecut;
  bool debug_overlay = false;
  std::uint64_t seed = 42;
  SplitRatios ratios;
  ClassifierConfig classifier;
  ReportSettings report;

  /// Throws ConfigError on unknown keys, wrong types or invalid values.
  static PipelineConfig from_json(const nlohmann::json& doc);
  static PipelineConfig load(const std::filesystem::path& path);
  nlohmann::ordered_json to_json() const;
};

nlohmann::ordered_json to_json(const ClassifierConfig& config);
/// Keys absent from `doc` keep the backbone's defaults.
ClassifierConfig classifier_config_from_json(const nlohmann::json& doc);

/// Uses FACECUT_PREDICTOR_PATH when no predictor path is configured.
std::unique_ptr<LandmarkProvider> make_provider(const LandmarkSettings& settings);

}  // namespace facecut
