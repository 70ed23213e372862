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

#include "facecut/config.hpp"

#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <string>

#include "facecut/errors.hpp"

namespace facecut {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Object view that rejects keys outside an allowed set.
class Section {
 public:
  Section(const json& doc, std::string name, std::initializer_list<std::string_view> allowed)
      : doc_(doc), name_(std::move(name)) {
    if (!doc_.is_object()) throw ConfigError(name_ + ": expected an object");
    for (const auto& [key, value] : doc_.items()) {
      bool known = false;
      for (auto a : allowed) known = known || key == a;
      if (!known) throw ConfigError(name_ + ": unknown key '" + key + "'");
    }
  }

  bool has(const char* key) const { return doc_.contains(key); }
  const json& at(const char* key) const { return doc_.at(key); }

  template <class T>
  void read(const char* key, T& out) const {
    if (!doc_.contains(key)) return;
    try {
      out = doc_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(name_ + "." + key + ": wrong type");
    }
  }

  std::string text(const char* key, std::string fallback) const {
    read(key, fallback);
    return fallback;
  }

  std::string path(const char* key) const { return name_ + "." + key; }

 private:
  const json& doc_;
  std::string name_;
};

template <class Enum>
Enum pick(std::string_view where, const std::string& value,
          std::initializer_list<std::pair<std::string_view, Enum>> options) {
  for (const auto& [name, e] : options) {
    if (value == name) return e;
  }
  throw ConfigError(std::string(where) + ": unsupported value '" + value + "'");
}

Rgb rgb_from(const Section& s, const char* key, Rgb fallback) {
  if (!s.has(key)) return fallback;
  const json& v = s.at(key);
  if (v.is_string()) {
    try {
      return parse_rgb(v.get<std::string>());
    } catch (const InputError& e) {
      throw ConfigError(s.path(key) + ": " + e.what());
    }
  }
  if (!v.is_array() || v.size() != 3) throw ConfigError(s.path(key) + ": expected [r, g, b]");
  int c[3];
  for (int i = 0; i < 3; ++i) {
    if (!v[i].is_number_integer() || v[i].get<int>() < 0 || v[i].get<int>() > 255) {
      throw ConfigError(s.path(key) + ": channels must be integers in [0, 255]");
    }
    c[i] = v[i].get<int>();
  }
  return Rgb{static_cast<std::uint8_t>(c[0]), static_cast<std::uint8_t>(c[1]), static_cast<std::uint8_t>(c[2])};
}

ordered_json rgb_json(const Rgb& c) { return ordered_json::array({c.r, c.g, c.b}); }

std::string_view name_of(ProviderKind k) { return k == ProviderKind::sidecar ? "sidecar" : "predictor"; }
std::string_view name_of(DetectorKind k) { return k == DetectorKind::cascade ? "cascade" : "full_image"; }
std::string_view name_of(FacePolicy p) { return p == FacePolicy::largest ? "largest" : "all"; }
std::string_view name_of(NoFacePolicy p) {
  switch (p) {
    case NoFacePolicy::skip: return "skip";
    case NoFacePolicy::passthrough: return "passthrough";
    case NoFacePolicy::error: return "error";
  }
  return "skip";
}

}  // namespace

ordered_json to_json(const ClassifierConfig& c) {
  ordered_json j;
  j["backbone"] = std::string(to_string(c.backbone));
  j["num_classes"] = c.num_classes;
  j["class_names"] = c.class_names;
  j["epochs"] = c.epochs;
  j["loss"] = std::string(to_string(c.loss));
  j["batch_size"] = c.batch_size;
  j["image_size"] = {c.image_height, c.image_width};
  j["learning_rate"] = c.learning_rate;
  j["seed"] = c.seed;
  j["pad"] = rgb_json(c.pad);
  j["pixel_mean"] = c.pixel_mean;
  j["pixel_std"] = c.pixel_std;
  j["backbone_path"] = c.backbone_path.string();
  j["toy_channels"] = c.toy_channels;
  return j;
}

ClassifierConfig classifier_config_from_json(const json& doc) {
  const Section s(doc, "classifier",
                  {"backbone", "num_classes", "class_names", "epochs", "loss", "batch_size", "image_size",
                   "learning_rate", "seed", "pad", "pixel_mean", "pixel_std", "backbone_path", "toy_channels"});
  const Backbone backbone = pick<Backbone>(s.path("backbone"), s.text("backbone", "toy"),
                                           {{"toy", Backbone::toy}, {"large", Backbone::large_pretrained}});
  ClassifierConfig c = ClassifierConfig::defaults_for(backbone);
  s.read("num_classes", c.num_classes);
  s.read("class_names", c.class_names);
  s.read("epochs", c.epochs);
  c.loss = pick<LossKind>(s.path("loss"), s.text("loss", std::string(to_string(c.loss))),
                          {{"xent", LossKind::cross_entropy}, {"kl", LossKind::kl_divergence}});
  s.read("batch_size", c.batch_size);
  if (s.has("image_size")) {
    std::vector<int> size;
    s.read("image_size", size);
    if (size.size() != 2) throw ConfigError("classifier.image_size: expected [height, width]");
    c.image_height = size[0];
    c.image_width = size[1];
  }
  s.read("learning_rate", c.learning_rate);
  s.read("seed", c.seed);
  c.pad = rgb_from(s, "pad", c.pad);
  s.read("pixel_mean", c.pixel_mean);
  s.read("pixel_std", c.pixel_std);
  c.backbone_path = s.text("backbone_path", c.backbone_path.string());
  s.read("toy_channels", c.toy_channels);
  c.validate();
  return c;
}

PipelineConfig PipelineConfig::from_json(const json& doc) {
  PipelineConfig cfg;
  const Section root(doc, "config", {"landmarks", "facecut", "dataset", "classifier", "report"});

  if (root.has("landmarks")) {
    const Section s(root.at("landmarks"), "landmarks",
                    {"provider", "predictor_path", "detector", "detector_path", "min_face_size"});
    cfg.landmarks.provider = pick<ProviderKind>(s.path("provider"), s.text("provider", "sidecar"),
                                                {{"sidecar", ProviderKind::sidecar}, {"predictor", ProviderKind::predictor}});
    auto& p = cfg.landmarks.predictor;
    p.predictor_path = s.text("predictor_path", "");
    p.detector = pick<DetectorKind>(s.path("detector"), s.text("detector", "cascade"),
                                    {{"cascade", DetectorKind::cascade}, {"full_image", DetectorKind::full_image}});
    p.detector_path = s.text("detector_path", "");
    s.read("min_face_size", p.min_face_size);
    if (p.min_face_size < 1) throw ConfigError("landmarks.min_face_size must be positive");
  }

  if (root.has("facecut")) {
    const Section s(root.at("facecut"), "facecut", {"include_point_zero", "fill", "faces", "no_face", "debug_overlay"});
    s.read("include_point_zero", cfg.facecut.include_point_zero);
    cfg.facecut.fill = rgb_from(s, "fill", cfg.facecut.fill);
    cfg.facecut.faces = pick<FacePolicy>(s.path("faces"), s.text("faces", "largest"),
                                         {{"largest", FacePolicy::largest}, {"all", FacePolicy::all}});
    cfg.facecut.no_face = pick<NoFacePolicy>(
        s.path("no_face"), s.text("no_face", "skip"),
        {{"skip", NoFacePolicy::skip}, {"passthrough", NoFacePolicy::passthrough}, {"error", NoFacePolicy::error}});
    s.read("debug_overlay", cfg.debug_overlay);
  }

  if (root.has("dataset")) {
    const Section s(root.at("dataset"), "dataset", {"seed", "ratios"});
    s.read("seed", cfg.seed);
    if (s.has("ratios")) {
      std::vector<double> r;
      s.read("ratios", r);
      if (r.size() != 3) throw ConfigError("dataset.ratios: expected [train, val, test]");
      cfg.ratios = {r[0], r[1], r[2]};
    }
    try {
      cfg.ratios.validate();
    } catch (const RatioError& e) {
      throw ConfigError(std::string("dataset.ratios: ") + e.what());
    }
  }

  if (root.has("classifier")) cfg.classifier = classifier_config_from_json(root.at("classifier"));

  if (root.has("report")) {
    const Section s(root.at("report"), "report", {"dir"});
    cfg.report.dir = s.text("dir", cfg.report.dir.string());
  }
  return cfg;
}

PipelineConfig PipelineConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return from_json(doc);
}

ordered_json PipelineConfig::to_json() const {
  ordered_json j;
  j["landmarks"] = {{"provider", name_of(landmarks.provider)},
                    {"predictor_path", landmarks.predictor.predictor_path.string()},
                    {"detector", name_of(landmarks.predictor.detector)},
                    {"detector_path", landmarks.predictor.detector_path.string()},
                    {"min_face_size", landmarks.predictor.min_face_size}};
  j["facecut"] = {{"include_point_zero", facecut.include_point_zero},
                  {"fill", rgb_json(facecut.fill)},
                  {"faces", name_of(facecut.faces)},
                  {"no_face", name_of(facecut.no_face)},
                  {"debug_overlay", debug_overlay}};
  j["dataset"] = {{"seed", seed}, {"ratios", {ratios.train, ratios.val, ratios.test}}};
  j["classifier"] = facecut::to_json(classifier);
  j["report"] = {{"dir", report.dir.string()}};
  return j;
}

std::unique_ptr<LandmarkProvider> make_provider(const LandmarkSettings& settings) {
  if (settings.provider == ProviderKind::sidecar) return std::make_unique<SidecarProvider>();
  PredictorSettings p = settings.predictor;
  if (p.predictor_path.empty()) {
    if (const char* env = std::getenv("FACECUT_PREDICTOR_PATH"); env && *env) p.predictor_path = env;
  }
  if (p.predictor_path.empty()) {
    throw ProviderInitError("no predictor model configured (landmarks.predictor_path or FACECUT_PREDICTOR_PATH)");
  }
  return std::make_unique<PredictorProvider>(p);
}

}  // namespace facecut
