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

#include "facecut/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>

#include <opencv2/dnn.hpp>
#include <spdlog/spdlog.h>

#include "facecut/config.hpp"
#include "facecut/errors.hpp"
#include "facecut/random.hpp"

namespace facecut {

namespace fs = std::filesystem;
using nn::FeatureMaps;
using nn::Matrix;

std::string_view to_string(Backbone backbone) {
  return backbone == Backbone::toy ? "toy" : "large";
}

std::string_view to_string(LossKind loss) {
  return loss == LossKind::cross_entropy ? "xent" : "kl";
}

ClassifierConfig ClassifierConfig::defaults_for(Backbone backbone) {
  ClassifierConfig config;
  config.backbone = backbone;
  if (backbone == Backbone::large_pretrained) {
    config.image_height = 224;
    config.image_width = 224;
    config.pixel_mean = {0.485, 0.456, 0.406};
    config.pixel_std = {0.229, 0.224, 0.225};
  }
  return config;
}

void ClassifierConfig::validate() const {
  if (num_classes < 2) throw ConfigError("num_classes must be at least 2");
  if (class_names.size() != static_cast<std::size_t>(num_classes)) {
    throw ConfigError("class_names must list num_classes names");
  }
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (image_height <= 0 || image_width <= 0) throw ConfigError("image_size must be positive");
  if (!(learning_rate > 0)) throw ConfigError("learning_rate must be positive");
  for (double s : pixel_std) {
    if (!(s > 0)) throw ConfigError("pixel_std entries must be positive");
  }
  if (backbone == Backbone::toy) {
    if (toy_channels.empty()) throw ConfigError("toy_channels must not be empty");
    int h = image_height, w = image_width;
    for (int c : toy_channels) {
      if (c < 1) throw ConfigError("toy_channels entries must be positive");
      h /= 2;
      w /= 2;
    }
    if (h < 1 || w < 1) throw ConfigError("image_size too small for the toy backbone");
  }
}

// Frozen extractor ------------------------------------------------------------

struct Classifier::Frozen {
  mutable std::mutex mutex;  // cv::dnn::Net::forward is not reentrant
  mutable cv::dnn::Net net;
  int channels = 0;
  bool spatial = false;

  FeatureMaps<double> run(const FeatureMaps<double>& input) const {
    const int H = input.height, W = input.width;
    FeatureMaps<double> out;
    for (int b = 0; b < input.batch; ++b) {
      const int dims[4] = {1, 3, H, W};
      cv::Mat blob(4, dims, CV_32F);
      float* dst = blob.ptr<float>();
      const auto sample = input.sample(b);
      for (int c = 0; c < 3; ++c) {
        for (Eigen::Index i = 0; i < sample.cols(); ++i) *dst++ = static_cast<float>(sample(c, i));
      }
      cv::Mat result;
      {
        std::lock_guard lock(mutex);
        net.setInput(blob);
        result = net.forward().clone();
      }
      int c = 0, h = 1, w = 1;
      if (result.dims == 4) {
        c = result.size[1];
        h = result.size[2];
        w = result.size[3];
      } else if (result.dims == 2) {
        c = result.size[1];
      } else {
        throw WeightLoadError("backbone output has unsupported rank " + std::to_string(result.dims));
      }
      if (b == 0) out = FeatureMaps<double>(c, input.batch, h, w);
      if (out.channels() != c || out.height != h || out.width != w) {
        throw ShapeError("backbone output shape changed between samples");
      }
      const float* src = result.ptr<float>();
      auto target = out.sample(b);
      for (int ch = 0; ch < c; ++ch) {
        for (Eigen::Index i = 0; i < target.cols(); ++i) target(ch, i) = *src++;
      }
    }
    return out;
  }
};

Classifier::Classifier() : first_batch_loss_(std::numeric_limits<double>::quiet_NaN()) {}
Classifier::~Classifier() = default;
Classifier::Classifier(Classifier&&) noexcept = default;
Classifier& Classifier::operator=(Classifier&&) noexcept = default;

Classifier Classifier::build(const ClassifierConfig& config) {
  config.validate();
  Classifier model;
  model.config_ = config;
  std::mt19937_64 rng(config.seed);
  int features = 0;
  if (config.backbone == Backbone::toy) {
    model.conv_.emplace(3, config.toy_channels, rng);
    features = model.conv_->output_channels();
  } else {
    if (config.backbone_path.empty()) {
      throw WeightLoadError("large_pretrained backbone needs classifier.backbone_path");
    }
    auto frozen = std::make_unique<Frozen>();
    try {
      frozen->net = cv::dnn::readNet(config.backbone_path.string());
    } catch (const cv::Exception& e) {
      throw WeightLoadError("cannot load backbone " + config.backbone_path.string() + ": " + e.what());
    }
    if (frozen->net.empty()) {
      throw WeightLoadError("cannot load backbone " + config.backbone_path.string());
    }
    FeatureMaps<double> probe(3, 1, config.image_height, config.image_width);
    FeatureMaps<double> tap;
    try {
      tap = frozen->run(probe);
    } catch (const cv::Exception& e) {
      throw WeightLoadError("backbone rejects " + std::to_string(config.image_height) + "x" +
                            std::to_string(config.image_width) + " input: " + e.what());
    }
    frozen->channels = tap.channels();
    frozen->spatial = tap.height > 1 || tap.width > 1;
    features = tap.channels();
    model.frozen_ = std::move(frozen);
  }
  const int classes = config.num_classes;
  std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / (features + classes)));
  model.head_.weight.resize(classes, features);
  for (Eigen::Index i = 0; i < model.head_.weight.size(); ++i) model.head_.weight.data()[i] = normal(rng);
  model.head_.bias = Eigen::VectorXd::Zero(classes);
  return model;
}

bool Classifier::trainable_backbone() const { return conv_.has_value(); }

bool Classifier::exposes_feature_tap() const { return conv_.has_value() || (frozen_ && frozen_->spatial); }

nn::ConvStack<double>* Classifier::conv_stack() { return conv_ ? &*conv_ : nullptr; }
const nn::ConvStack<double>* Classifier::conv_stack() const { return conv_ ? &*conv_ : nullptr; }

RgbImage Classifier::prepare(const RgbImage& image) const {
  if (image.empty()) throw DecodeError("empty image");
  if (image.rows == config_.image_height && image.cols == config_.image_width) return image;
  return letterbox(image, config_.image_height, config_.image_width, config_.pad);
}

FeatureMaps<double> Classifier::to_input(std::span<const RgbImage> prepared) const {
  const int H = config_.image_height, W = config_.image_width;
  FeatureMaps<double> input(3, static_cast<int>(prepared.size()), H, W);
  for (std::size_t b = 0; b < prepared.size(); ++b) {
    const RgbImage& img = prepared[b];
    if (img.rows != H || img.cols != W) throw ShapeError("image not prepared to the model input size");
    auto sample = input.sample(static_cast<int>(b));
    for (int y = 0; y < H; ++y) {
      for (int x = 0; x < W; ++x) {
        const cv::Vec3b& px = img(y, x);
        for (int c = 0; c < 3; ++c) {
          sample(c, Eigen::Index{y} * W + x) = (px[c] / 255.0 - config_.pixel_mean[c]) / config_.pixel_std[c];
        }
      }
    }
  }
  return input;
}

FeatureMaps<double> Classifier::features(std::span<const RgbImage> prepared) const {
  const FeatureMaps<double> input = to_input(prepared);
  if (conv_) return conv_->forward(input);
  return frozen_->run(input);
}

Matrix<double> Classifier::logits_from_features(const FeatureMaps<double>& tap) const {
  return head_.forward(nn::global_average_pool(tap));
}

ClassProbs Classifier::predict(const RgbImage& image) const {
  const RgbImage prepared = prepare(image);
  const Matrix<double> probs = nn::softmax_columns(logits_from_features(features({&prepared, 1})));
  return {probs.col(0)};
}

std::vector<ClassProbs> Classifier::predict(std::span<const RgbImage> images) const {
  std::vector<ClassProbs> out;
  out.reserve(images.size());
  constexpr std::size_t kChunk = 64;
  for (std::size_t start = 0; start < images.size(); start += kChunk) {
    std::vector<RgbImage> prepared;
    for (std::size_t i = start; i < std::min(images.size(), start + kChunk); ++i) {
      prepared.push_back(prepare(images[i]));
    }
    const Matrix<double> probs = nn::softmax_columns(logits_from_features(features(prepared)));
    for (Eigen::Index j = 0; j < probs.cols(); ++j) out.push_back({probs.col(j)});
  }
  return out;
}

// Training --------------------------------------------------------------------

namespace {

double loss_value(LossKind kind, const Matrix<double>& logits, const Matrix<double>& targets) {
  return kind == LossKind::cross_entropy ? nn::cross_entropy(logits, targets)
                                         : nn::kl_divergence(logits, targets);
}

int count_correct(const Matrix<double>& logits, std::span<const int> labels) {
  int correct = 0;
  for (Eigen::Index j = 0; j < logits.cols(); ++j) {
    Eigen::Index best = 0;
    logits.col(j).maxCoeff(&best);
    correct += best == labels[static_cast<std::size_t>(j)];
  }
  return correct;
}

struct AdamSlot {
  Eigen::Map<Eigen::VectorXd> value;
  Eigen::Map<const Eigen::VectorXd> grad;
  Eigen::VectorXd m;
  Eigen::VectorXd v;
};

template <typename Derived>
Eigen::Map<Eigen::VectorXd> flat(Eigen::PlainObjectBase<Derived>& x) {
  return {x.data(), x.size()};
}
template <typename Derived>
Eigen::Map<const Eigen::VectorXd> flat(const Eigen::PlainObjectBase<Derived>& x) {
  return {x.data(), x.size()};
}

class Adam {
 public:
  explicit Adam(double lr) : lr_(lr) {}

  template <typename P, typename G>
  void add(P& param, const G& grad) {
    slots_.push_back({flat(param), flat(grad), Eigen::VectorXd::Zero(param.size()),
                      Eigen::VectorXd::Zero(param.size())});
  }

  void step() {
    ++t_;
    const double c1 = 1.0 - std::pow(kBeta1, t_);
    const double c2 = 1.0 - std::pow(kBeta2, t_);
    for (auto& s : slots_) {
      s.m = kBeta1 * s.m + (1.0 - kBeta1) * s.grad;
      s.v = kBeta2 * s.v + (1.0 - kBeta2) * s.grad.cwiseAbs2();
      s.value.array() -= lr_ * (s.m.array() / c1) / ((s.v.array() / c2).sqrt() + kEps);
    }
  }

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;
  double lr_;
  int t_ = 0;
  std::vector<AdamSlot> slots_;
};

void check_labels(const LabeledBatch& set, int classes, const char* name) {
  if (set.images.empty()) throw DataError(std::string(name) + " split is empty");
  if (set.images.size() != set.labels.size()) throw DataError(std::string(name) + " images and labels differ in count");
  for (int label : set.labels) {
    if (label < 0 || label >= classes) throw LabelError("label index " + std::to_string(label) + " out of range");
  }
}

std::vector<RgbImage> prepare_all(const Classifier& model, const std::vector<RgbImage>& images) {
  std::vector<RgbImage> prepared;
  prepared.reserve(images.size());
  for (const auto& img : images) prepared.push_back(model.prepare(img));
  return prepared;
}

}  // namespace

std::pair<double, double> evaluate_loss(const Classifier& model, const LabeledBatch& set, LossKind loss) {
  check_labels(set, model.config().num_classes, "evaluation");
  const std::vector<RgbImage> prepared = prepare_all(model, set.images);
  double total = 0;
  int correct = 0;
  constexpr std::size_t kChunk = 64;
  for (std::size_t start = 0; start < prepared.size(); start += kChunk) {
    const std::size_t n = std::min(kChunk, prepared.size() - start);
    const std::span<const RgbImage> images(prepared.data() + start, n);
    const std::span<const int> labels(set.labels.data() + start, n);
    const Matrix<double> logits = model.logits_from_features(model.features(images));
    total += loss_value(loss, logits, nn::one_hot<double>(labels, model.config().num_classes)) * static_cast<double>(n);
    correct += count_correct(logits, labels);
  }
  const double count = static_cast<double>(prepared.size());
  return {total / count, correct / count};
}

void train(Classifier& model, const LabeledBatch& train_set, const LabeledBatch& val_set) {
  const ClassifierConfig& config = model.config();
  const int classes = config.num_classes;
  check_labels(train_set, classes, "train");
  check_labels(val_set, classes, "val");

  const std::vector<RgbImage> prepared = prepare_all(model, train_set.images);
  const std::size_t n = prepared.size();

  // A frozen extractor is evaluated once; only the head learns.
  Matrix<double> frozen_pooled;
  int tap_h = 0, tap_w = 0;
  if (!model.trainable_backbone()) {
    for (std::size_t start = 0; start < n; start += 64) {
      const std::size_t len = std::min<std::size_t>(64, n - start);
      const auto tap = model.features({prepared.data() + start, len});
      const Matrix<double> pooled = nn::global_average_pool(tap);
      if (frozen_pooled.size() == 0) frozen_pooled.resize(pooled.rows(), static_cast<Eigen::Index>(n));
      frozen_pooled.middleCols(static_cast<Eigen::Index>(start), pooled.cols()) = pooled;
    }
  }

  nn::ConvStack<double>* conv = model.conv_stack();
  std::vector<nn::ConvStack<double>::Stage> conv_grads;
  if (conv) {
    for (const auto& s : conv->stages()) {
      conv_grads.push_back({Matrix<double>::Zero(s.weight.rows(), s.weight.cols()),
                            Eigen::VectorXd::Zero(s.bias.size())});
    }
  }
  nn::Dense<double> head_grad{Matrix<double>::Zero(model.head().weight.rows(), model.head().weight.cols()),
                              Eigen::VectorXd::Zero(model.head().bias.size())};

  Adam adam(config.learning_rate);
  if (conv) {
    for (std::size_t k = 0; k < conv->stages().size(); ++k) {
      adam.add(conv->stages()[k].weight, conv_grads[k].weight);
      adam.add(conv->stages()[k].bias, conv_grads[k].bias);
    }
  }
  adam.add(model.head().weight, head_grad.weight);
  adam.add(model.head().bias, head_grad.bias);

  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(n);
  model.history().clear();
  model.set_first_batch_loss(std::numeric_limits<double>::quiet_NaN());

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    seeded_shuffle<std::size_t>(order, rng);
    double loss_sum = 0;
    int correct = 0;
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t len = std::min<std::size_t>(static_cast<std::size_t>(config.batch_size), n - start);
      std::vector<int> labels(len);
      for (std::size_t i = 0; i < len; ++i) labels[i] = train_set.labels[order[start + i]];
      const Matrix<double> targets = nn::one_hot<double>(labels, classes);

      Matrix<double> pooled;
      FeatureMaps<double> tap;
      nn::ConvStack<double>::Cache cache;
      if (conv) {
        std::vector<RgbImage> batch(len);
        for (std::size_t i = 0; i < len; ++i) batch[i] = prepared[order[start + i]];
        tap = conv->forward(model.to_input(batch), &cache);
        tap_h = tap.height;
        tap_w = tap.width;
        pooled = nn::global_average_pool(tap);
      } else {
        pooled.resize(frozen_pooled.rows(), static_cast<Eigen::Index>(len));
        for (std::size_t i = 0; i < len; ++i) {
          pooled.col(static_cast<Eigen::Index>(i)) = frozen_pooled.col(static_cast<Eigen::Index>(order[start + i]));
        }
      }
      const Matrix<double> logits = model.head().forward(pooled);
      const double loss = loss_value(config.loss, logits, targets);
      if (!std::isfinite(loss)) {
        throw NumericError("non-finite training loss at epoch " + std::to_string(epoch));
      }
      if (epoch == 0 && start == 0) model.set_first_batch_loss(loss);
      loss_sum += loss * static_cast<double>(len);
      correct += count_correct(logits, labels);

      const Matrix<double> grad_logits = nn::loss_gradient(logits, targets);
      head_grad.weight.noalias() = grad_logits * pooled.transpose();
      head_grad.bias = grad_logits.rowwise().sum();
      if (conv) {
        const Matrix<double> grad_pooled = model.head().weight.transpose() * grad_logits;
        for (auto& g : conv_grads) {
          g.weight.setZero();
          g.bias.setZero();
        }
        conv->backward(nn::global_average_pool_backward(grad_pooled, tap_h, tap_w), cache, conv_grads);
      }
      adam.step();
    }
    EpochStats stats;
    stats.epoch = epoch + 1;
    stats.train_loss = loss_sum / static_cast<double>(n);
    stats.train_acc = correct / static_cast<double>(n);
    std::tie(stats.val_loss, stats.val_acc) = evaluate_loss(model, val_set, config.loss);
    if (!std::isfinite(stats.train_loss) || !std::isfinite(stats.val_loss)) {
      throw NumericError("non-finite loss at epoch " + std::to_string(stats.epoch));
    }
    spdlog::info("epoch {}/{}: loss {:.4f} acc {:.4f} val_loss {:.4f} val_acc {:.4f}", stats.epoch,
                 config.epochs, stats.train_loss, stats.train_acc, stats.val_loss, stats.val_acc);
    model.history().push_back(stats);
  }
}

LabeledBatch load_split(const DatasetManifest& manifest, Split split, const std::vector<std::string>& class_names) {
  LabeledBatch batch;
  for (const SampleRecord* record : manifest.in_split(split)) {
    const auto name = to_string(record->label);
    const auto it = std::find(class_names.begin(), class_names.end(), name);
    if (it == class_names.end()) {
      throw LabelError("label '" + std::string(name) + "' of " + record->path.string() + " is not a model class");
    }
    batch.images.push_back(load_rgb(record->path));
    batch.labels.push_back(static_cast<int>(it - class_names.begin()));
  }
  return batch;
}

void train(Classifier& model, const DatasetManifest& manifest) {
  const LabeledBatch train_set = load_split(manifest, Split::train, model.class_names());
  const LabeledBatch val_set = load_split(manifest, Split::val, model.class_names());
  if (train_set.images.empty()) throw DataError("manifest has no train records");
  if (val_set.images.empty()) throw DataError("manifest has no val records");
  train(model, train_set, val_set);
}

// Persistence -----------------------------------------------------------------

void write_history(const fs::path& path, const std::vector<EpochStats>& history) {
  std::ofstream out(path, std::ios::trunc);
  out << "epoch,train_loss,train_acc,val_loss,val_acc\n";
  out.precision(17);
  for (const auto& e : history) {
    out << e.epoch << ',' << e.train_loss << ',' << e.train_acc << ',' << e.val_loss << ',' << e.val_acc << '\n';
  }
  if (!out) throw IoError("cannot write " + path.string());
}

std::vector<EpochStats> read_history(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open history " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path.string() + ": empty history");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "epoch,train_loss,train_acc,val_loss,val_acc") {
    throw ParseError(path.string() + ": unexpected history header");
  }
  std::vector<EpochStats> history;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::istringstream row(line);
    EpochStats e;
    char c1 = 0, c2 = 0, c3 = 0, c4 = 0;
    if (!(row >> e.epoch >> c1 >> e.train_loss >> c2 >> e.train_acc >> c3 >> e.val_loss >> c4 >> e.val_acc) ||
        c1 != ',' || c2 != ',' || c3 != ',' || c4 != ',') {
      throw ParseError(path.string() + ": malformed row '" + line + "'");
    }
    row >> std::ws;
    if (!row.eof()) throw ParseError(path.string() + ": trailing data in '" + line + "'");
    history.push_back(e);
  }
  if (history.empty()) throw ParseError(path.string() + ": history has no epochs");
  return history;
}

namespace {

constexpr char kWeightsMagic[4] = {'F', 'C', 'W', '1'};

void write_tensor(std::ofstream& out, const Matrix<double>& m) {
  const std::uint32_t dims[2] = {static_cast<std::uint32_t>(m.rows()), static_cast<std::uint32_t>(m.cols())};
  out.write(reinterpret_cast<const char*>(dims), sizeof dims);
  out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
}

template <typename Derived>
void read_tensor(std::ifstream& in, Eigen::PlainObjectBase<Derived>& target, const fs::path& path) {
  std::uint32_t dims[2] = {0, 0};
  in.read(reinterpret_cast<char*>(dims), sizeof dims);
  if (!in || dims[0] != target.rows() || dims[1] != target.cols()) {
    throw WeightLoadError(path.string() + ": tensor shape does not match the configuration");
  }
  in.read(reinterpret_cast<char*>(target.data()), static_cast<std::streamsize>(target.size() * sizeof(double)));
  if (!in) throw WeightLoadError(path.string() + ": truncated weights");
}

}  // namespace

void Classifier::save(const fs::path& model_dir) const {
  fs::create_directories(model_dir);
  {
    std::ofstream out(model_dir / "config.json", std::ios::trunc);
    out << to_json(config_).dump(2) << '\n';
    if (!out) throw IoError("cannot write " + (model_dir / "config.json").string());
  }
  write_history(model_dir / "history.csv", history_);
  std::ofstream out(model_dir / "weights.bin", std::ios::binary | std::ios::trunc);
  out.write(kWeightsMagic, sizeof kWeightsMagic);
  if (conv_) {
    for (const auto& s : conv_->stages()) {
      write_tensor(out, s.weight);
      write_tensor(out, s.bias);
    }
  }
  write_tensor(out, head_.weight);
  write_tensor(out, head_.bias);
  if (!out) throw IoError("cannot write " + (model_dir / "weights.bin").string());
}

Classifier Classifier::load(const fs::path& model_dir) {
  std::ifstream config_file(model_dir / "config.json");
  if (!config_file) throw WeightLoadError("no config.json in " + model_dir.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(config_file);
  } catch (const nlohmann::json::exception& e) {
    throw WeightLoadError(model_dir.string() + "/config.json: " + e.what());
  }
  Classifier model = build(classifier_config_from_json(doc));
  const fs::path weights = model_dir / "weights.bin";
  std::ifstream in(weights, std::ios::binary);
  char magic[4] = {};
  in.read(magic, sizeof magic);
  if (!in || !std::equal(magic, magic + 4, kWeightsMagic)) {
    throw WeightLoadError(weights.string() + ": missing or not a weights file");
  }
  if (model.conv_) {
    for (auto& s : model.conv_->stages()) {
      read_tensor(in, s.weight, weights);
      read_tensor(in, s.bias, weights);
    }
  }
  read_tensor(in, model.head_.weight, weights);
  read_tensor(in, model.head_.bias, weights);
  if (fs::exists(model_dir / "history.csv")) {
    try {
      model.history_ = read_history(model_dir / "history.csv");
    } catch (const ParseError&) {
      model.history_.clear();
    }
  }
  return model;
}

}  // namespace facecut
