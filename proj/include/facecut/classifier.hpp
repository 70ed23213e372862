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
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "facecut/dataset.hpp"
#include "facecut/image.hpp"
#include "facecut/nn.hpp"

namespace facecut {

enum class Backbone { toy, large_pretrained };
enum class LossKind { cross_entropy, kl_divergence };

struct ClassifierConfig {
  Backbone backbone = Backbone::toy;
  int num_classes = 2;
  std::vector<std::string> class_names = {"without_mask", "with_mask"};
  int epochs = 10;
  LossKind loss = LossKind::cross_entropy;
  int batch_size = 32;
  int image_height = 64;
  int image_width = 64;
  double learning_rate = 1e-4;
  std::uint64_t seed = 42;
  /// Canvas padding when letterboxing; matches the face-cut fill.
  Rgb pad{0, 0, 0};
  /// Per-channel normalization applied to pixel / 255.
  std::array<double, 3> pixel_mean{0.0, 0.0, 0.0};
  std::array<double, 3> pixel_std{1.0, 1.0, 1.0};
  /// Feature extractor without its classification layer (ONNX, Caffe or
  /// TensorFlow graph readable by OpenCV). Used by large_pretrained only.
  std::filesystem::path backbone_path;
  std::vector<int> toy_channels = {8, 16, 32};

  /// Defaults for a backbone: 224x224 with ImageNet statistics for
  /// large_pretrained, 64x64 in [0, 1] for toy.
  static ClassifierConfig defaults_for(Backbone backbone);

  /// Throws ConfigError on a violated invariant.
  void validate() const;
};

std::string_view to_string(Backbone backbone);
std::string_view to_string(LossKind loss);

struct EpochStats {
  int epoch = 0;
  double train_loss = 0;
  double train_acc = 0;
  double val_loss = 0;
  double val_acc = 0;
};

/// Softmax output for one image.
struct ClassProbs {
  Eigen::VectorXd probs;

  std::size_t argmax() const {
    Eigen::Index best = 0;
    probs.maxCoeff(&best);
    return static_cast<std::size_t>(best);
  }
};

/// Image tensors with integer class targets.
struct LabeledBatch {
  std::vector<RgbImage> images;
  std::vector<int> labels;
};

/// Backbone (toy conv stack, or a frozen pretrained extractor) followed by
/// global average pooling, a dense layer and softmax. The last feature maps
/// and the pre-softmax logits are both reachable for explanation.
class Classifier {
 public:
  ~Classifier();
  Classifier(Classifier&&) noexcept;
  Classifier& operator=(Classifier&&) noexcept;

  /// Throws WeightLoadError when the pretrained extractor cannot be loaded.
  static Classifier build(const ClassifierConfig& config);

  /// Reads config.json, history.csv and weights.bin from a model directory.
  static Classifier load(const std::filesystem::path& model_dir);
  void save(const std::filesystem::path& model_dir) const;

  const ClassifierConfig& config() const { return config_; }
  const std::vector<std::string>& class_names() const { return config_.class_names; }
  const std::vector<EpochStats>& history() const { return history_; }
  std::vector<EpochStats>& history() { return history_; }

  /// Loss of the first training batch before any update (NaN until trained).
  double first_batch_loss() const { return first_batch_loss_; }
  void set_first_batch_loss(double loss) { first_batch_loss_ = loss; }

  bool trainable_backbone() const;
  /// False when the extractor output has no spatial layout.
  bool exposes_feature_tap() const;

  nn::Dense<double>& head() { return head_; }
  const nn::Dense<double>& head() const { return head_; }
  nn::ConvStack<double>* conv_stack();
  const nn::ConvStack<double>* conv_stack() const;

  /// Letterbox and normalize to the model input.
  RgbImage prepare(const RgbImage& image) const;
  nn::FeatureMaps<double> to_input(std::span<const RgbImage> prepared) const;

  /// Last feature maps for already prepared images.
  nn::FeatureMaps<double> features(std::span<const RgbImage> prepared) const;
  nn::Matrix<double> logits_from_features(const nn::FeatureMaps<double>& tap) const;

  ClassProbs predict(const RgbImage& image) const;
  std::vector<ClassProbs> predict(std::span<const RgbImage> images) const;

 private:
  Classifier();
  struct Frozen;

  ClassifierConfig config_;
  std::optional<nn::ConvStack<double>> conv_;
  std::unique_ptr<Frozen> frozen_;
  nn::Dense<double> head_;
  std::vector<EpochStats> history_;
  double first_batch_loss_;
};

/// Number of parameters in the pooling + dense head.
inline Eigen::Index head_parameter_count(const Classifier& model) {
  return model.head().parameter_count();
}

/// Mini-batch Adam on the configured loss. Batch order per epoch is a seeded
/// shuffle. Throws DataError on an empty split and NumericError on a
/// non-finite loss.
void train(Classifier& model, const LabeledBatch& train_set, const LabeledBatch& val_set);

/// Loads the train and val splits of a manifest and trains on them.
void train(Classifier& model, const DatasetManifest& manifest);

/// Mean loss and accuracy of `model` on a labeled set under `loss`.
std::pair<double, double> evaluate_loss(const Classifier& model, const LabeledBatch& set,
                                        LossKind loss);

/// Decodes every record of a split. Throws LabelError when a record's label
/// is not one of the model's class names.
LabeledBatch load_split(const DatasetManifest& manifest, Split split,
                        const std::vector<std::string>& class_names);

/// Writes `epoch,train_loss,train_acc,val_loss,val_acc`.
void write_history(const std::filesystem::path& path, const std::vector<EpochStats>& history);
/// Throws ParseError on a malformed or empty file.
std::vector<EpochStats> read_history(const std::filesystem::path& path);

}  // namespace facecut
