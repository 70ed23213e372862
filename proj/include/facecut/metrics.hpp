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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

namespace facecut {

class Classifier;
struct DatasetManifest;
enum class Split;

using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Rows are true classes, columns predicted classes.
struct ConfusionMatrix {
  CountMatrix counts;
  std::vector<std::string> class_names;

  /// Throws InputError unless counts are square, non-negative, at least 2x2
  /// and match class_names.
  void validate() const;
  std::size_t size() const { return class_names.size(); }
};

/// A rate that is undefined when its denominator is zero.
using Rate = std::optional<double>;

struct AveragedScores {
  Rate precision;
  Rate recall;
  Rate f1;
  std::int64_t support = 0;
};

struct MetricsReport {
  std::vector<std::string> class_names;
  CountMatrix confusion;
  double accuracy = 0;
  std::vector<Rate> class_accuracy;  ///< diagonal / row sum
  Rate acsa;                         ///< mean of the defined class accuracies
  std::vector<Rate> ppv;             ///< diagonal / column sum
  std::vector<Rate> precision;
  std::vector<Rate> recall;
  std::vector<Rate> f1;
  std::vector<std::int64_t> support;
  AveragedScores macro_avg;
  AveragedScores weighted_avg;
};

/// counts[i][j] = number of samples with true label i predicted as j. Throws
/// InputError on empty or unequal inputs or unknown labels.
ConfusionMatrix confusion(std::span<const std::string> true_labels,
                          std::span<const std::string> predicted_labels,
                          const std::vector<std::string>& class_names);
ConfusionMatrix confusion(std::span<const int> true_labels, std::span<const int> predicted_labels,
                          const std::vector<std::string>& class_names);

/// Rates at full precision. Classes with an empty row (or column) get a null
/// recall (or precision) and drop out of the macro and weighted averages.
MetricsReport compute_metrics(const ConfusionMatrix& cm);

/// Mean of the defined entries, or null when none is defined.
Rate mean_of_defined(std::span<const Rate> values);

nlohmann::ordered_json to_json(const MetricsReport& report);
MetricsReport report_from_json(const nlohmann::json& doc);
void write_report(const std::filesystem::path& path, const MetricsReport& report);
MetricsReport read_report(const std::filesystem::path& path);

struct Evaluation {
  ConfusionMatrix confusion;
  MetricsReport report;
};

/// Predicts every record of `split`, builds the matrix and the report, and
/// writes the report when `report_path` is non-empty. Throws DataError when
/// the split is empty.
Evaluation evaluate(const Classifier& model, const DatasetManifest& manifest, Split split,
                    const std::filesystem::path& report_path = {});

}  // namespace facecut
