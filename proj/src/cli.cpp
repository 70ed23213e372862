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

#include "facecut/cli.hpp"

#include <CLI11.hpp>
#include <charconv>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "facecut/config.hpp"
#include "facecut/errors.hpp"
#include "facecut/explain.hpp"
#include "facecut/metrics.hpp"
#include "facecut/report.hpp"
#include "facecut/synthetic.hpp"

namespace facecut::cli {

namespace fs = std::filesystem;

namespace {

const std::map<std::string, ProviderKind> kProviders{{"sidecar", ProviderKind::sidecar},
                                                     {"predictor", ProviderKind::predictor}};
const std::map<std::string, NoFacePolicy> kNoFace{
    {"skip", NoFacePolicy::skip}, {"passthrough", NoFacePolicy::passthrough}, {"error", NoFacePolicy::error}};
const std::map<std::string, FacePolicy> kFaces{{"largest", FacePolicy::largest}, {"all", FacePolicy::all}};
const std::map<std::string, Backbone> kBackbones{{"toy", Backbone::toy}, {"large", Backbone::large_pretrained}};
const std::map<std::string, LossKind> kLosses{{"xent", LossKind::cross_entropy}, {"kl", LossKind::kl_divergence}};
const std::map<std::string, Split> kSplits{{"train", Split::train}, {"val", Split::val}, {"test", Split::test}};

// Flag values gathered before the config file is read; only flags that were
// given override the file.
struct Flags {
  fs::path config;
  std::string log_level = "info";

  fs::path input_dir, output_dir, manifest, out, model, report, image, history, metrics;
  std::uint64_t seed = 0;
  std::vector<double> ratios;
  std::string landmarks, no_face, faces;
  bool include_point_zero = false;
  std::string fill;
  bool debug_overlay = false;
  unsigned threads = 0;
  std::string backbone, loss;
  int epochs = 0;
  int batch_size = 0;
  double learning_rate = 0;
  fs::path backbone_path;
  std::string split = "test";
  std::string target_class;
  double alpha = 0.4;
  int count = 400;
  int size = 96;
};

template <class Map>
std::vector<std::string> keys(const Map& map) {
  std::vector<std::string> out;
  for (const auto& [key, value] : map) out.push_back(key);
  return out;
}

bool given(const CLI::App* app, const char* name) {
  const CLI::Option* opt = app->get_option_no_throw(name);
  return opt != nullptr && opt->count() > 0;
}

PipelineConfig load_config(const Flags& flags) {
  return flags.config.empty() ? PipelineConfig{} : PipelineConfig::load(flags.config);
}

void apply_common(const CLI::App* sub, const Flags& f, PipelineConfig& cfg) {
  if (given(sub, "--seed")) cfg.seed = f.seed;
  if (given(sub, "--ratios")) cfg.ratios = {f.ratios[0], f.ratios[1], f.ratios[2]};
  if (given(sub, "--landmarks")) cfg.landmarks.provider = kProviders.at(f.landmarks);
  if (given(sub, "--no-face")) cfg.facecut.no_face = kNoFace.at(f.no_face);
  if (given(sub, "--faces")) cfg.facecut.faces = kFaces.at(f.faces);
  if (given(sub, "--include-point-zero")) cfg.facecut.include_point_zero = f.include_point_zero;
  if (given(sub, "--fill")) cfg.facecut.fill = parse_rgb(f.fill);
  if (given(sub, "--debug-overlay")) cfg.debug_overlay = f.debug_overlay;
}

void apply_training(const CLI::App* sub, const Flags& f, PipelineConfig& cfg) {
  ClassifierConfig& c = cfg.classifier;
  if (given(sub, "--backbone") && kBackbones.at(f.backbone) != c.backbone) {
    // Input geometry and normalization follow the backbone.
    const ClassifierConfig d = ClassifierConfig::defaults_for(kBackbones.at(f.backbone));
    c.backbone = d.backbone;
    c.image_height = d.image_height;
    c.image_width = d.image_width;
    c.pixel_mean = d.pixel_mean;
    c.pixel_std = d.pixel_std;
  }
  if (given(sub, "--epochs")) c.epochs = f.epochs;
  if (given(sub, "--loss")) c.loss = kLosses.at(f.loss);
  if (given(sub, "--seed")) c.seed = f.seed;
  if (given(sub, "--batch-size")) c.batch_size = f.batch_size;
  if (given(sub, "--learning-rate")) c.learning_rate = f.learning_rate;
  if (given(sub, "--backbone-path")) c.backbone_path = f.backbone_path;
  c.validate();
}

std::size_t resolve_class(const Classifier& model, const std::string& text) {
  const auto& names = model.class_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == text) return i;
  }
  std::size_t index = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), index);
  if (ec == std::errc() && end == text.data() + text.size() && index < names.size()) return index;
  throw InputError("unknown class '" + text + "'");
}

int run_scan(const Flags& f) {
  DatasetManifest m = scan_dataset(f.input_dir);
  write_manifest(f.manifest, m);
  spdlog::info("scanned {} images into {}", m.records.size(), f.manifest.string());
  return 0;
}

int run_split(const CLI::App* sub, const Flags& f, PipelineConfig cfg) {
  apply_common(sub, f, cfg);
  DatasetManifest m = split_dataset(read_manifest(f.manifest), cfg.seed, cfg.ratios);
  write_manifest(f.out, m);
  for (Split s : {Split::train, Split::val, Split::test}) {
    spdlog::info("{}: {} records", to_string(s), m.in_split(s).size());
  }
  return 0;
}

int run_cut(const CLI::App* sub, const Flags& f, PipelineConfig cfg) {
  apply_common(sub, f, cfg);
  const DatasetManifest source = f.manifest.empty() ? scan_dataset(f.input_dir) : read_manifest(f.manifest);
  const auto provider = make_provider(cfg.landmarks);
  PreprocessOptions options{cfg.facecut, cfg.debug_overlay, f.threads};
  DatasetManifest cut = preprocess_dataset(source, *provider, options, f.output_dir);
  const fs::path out = f.out.empty() ? f.output_dir / "manifest.csv" : f.out;
  write_manifest(out, cut);
  spdlog::info("wrote {}", out.string());
  return 0;
}

int run_train(const CLI::App* sub, const Flags& f, PipelineConfig cfg) {
  apply_training(sub, f, cfg);
  const DatasetManifest m = read_manifest(f.manifest);
  Classifier model = Classifier::build(cfg.classifier);
  train(model, m);
  model.save(f.out);
  spdlog::info("saved model to {}", f.out.string());
  return 0;
}

int run_eval(const Flags& f, const PipelineConfig& cfg) {
  const fs::path report = f.report.empty() ? cfg.report.dir / "metrics.json" : f.report;
  const Classifier model = Classifier::load(f.model);
  const Evaluation result = evaluate(model, read_manifest(f.manifest), kSplits.at(f.split), report);
  spdlog::info("accuracy {:.4f}, acsa {:.4f}; wrote {}", result.report.accuracy, result.report.acsa.value_or(0.0),
               report.string());
  return 0;
}

int run_gradcam(const Flags& f) {
  if (f.alpha < 0 || f.alpha > 1) throw InputError("alpha must lie in [0, 1]");
  const Classifier model = Classifier::load(f.model);
  const std::size_t target = resolve_class(model, f.target_class);
  const RgbImage image = load_rgb(f.image);
  const ClassProbs probs = model.predict(image);
  spdlog::info("predicted {} ({:.4f})", model.class_names()[probs.argmax()], probs.probs[probs.argmax()]);
  const Heatmap heat = compute_cam(model, image, target);
  save_rgb(f.out, overlay(heat.upsampled, image, f.alpha));
  fs::path raw = f.out;
  raw.replace_extension(".heatmap.png");
  save_gray(raw, heat_to_gray(heat.upsampled));
  spdlog::info("wrote {} and {}", f.out.string(), raw.string());
  return 0;
}

int run_report(const Flags& f, const PipelineConfig& cfg) {
  const fs::path dir = f.output_dir.empty() ? cfg.report.dir : f.output_dir;
  const ReportFiles files = write_report_bundle(f.history, f.metrics, dir);
  std::ifstream summary(files.summary);
  std::cerr << summary.rdbuf();
  return 0;
}

int run_synth(const CLI::App* sub, const Flags& f, const PipelineConfig& cfg) {
  const std::uint64_t seed = given(sub, "--seed") ? f.seed : cfg.seed;
  const auto entries = generate_synthetic_dataset(f.output_dir, f.count, seed, f.size);
  spdlog::info("generated {} images under {}", entries.size(), f.output_dir.string());
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
  auto logger = spdlog::get("facecut");
  if (!logger) logger = spdlog::stderr_color_mt("facecut");
  spdlog::set_default_logger(logger);

  Flags f;
  CLI::App app{"Face-cut preprocessing, mask classification and explanation pipeline", "facecut-pipeline"};
  app.require_subcommand(1);
  app.add_option("--config", f.config, "JSON configuration; flags override its values")->check(CLI::ExistingFile);
  app.add_option("--log-level", f.log_level, "trace, debug, info, warn, error or off");

  auto ratios = [&](CLI::App* sub) {
    sub->add_option("--ratios", f.ratios, "train,val,test fractions")->delimiter(',')->expected(3);
  };
  auto seed = [&](CLI::App* sub) { sub->add_option("--seed", f.seed, "random seed"); };

  CLI::App* scan = app.add_subcommand("scan", "Index a with_mask/without_mask tree into a manifest");
  scan->add_option("--input-dir", f.input_dir)->required()->check(CLI::ExistingDirectory);
  scan->add_option("--manifest", f.manifest, "output manifest CSV")->required();

  CLI::App* split = app.add_subcommand("split", "Assign stratified train/val/test splits");
  split->add_option("--manifest", f.manifest, "input manifest")->required()->check(CLI::ExistingFile);
  split->add_option("--out", f.out, "output manifest")->required();
  seed(split);
  ratios(split);

  CLI::App* cut = app.add_subcommand("cut", "Cut faces along the landmark boundary");
  cut->add_option("--input-dir", f.input_dir)->check(CLI::ExistingDirectory);
  cut->add_option("--manifest", f.manifest, "cut the records of this manifest instead of scanning")
      ->check(CLI::ExistingFile);
  cut->add_option("--output-dir", f.output_dir)->required();
  cut->add_option("--out", f.out, "output manifest (default <output-dir>/manifest.csv)");
  cut->add_option("--landmarks", f.landmarks)->check(CLI::IsMember(keys(kProviders)));
  cut->add_option("--no-face", f.no_face)->check(CLI::IsMember(keys(kNoFace)));
  cut->add_option("--faces", f.faces)->check(CLI::IsMember(keys(kFaces)));
  cut->add_flag("--include-point-zero", f.include_point_zero);
  cut->add_option("--fill", f.fill, "R,G,B");
  cut->add_flag("--debug-overlay", f.debug_overlay);
  cut->add_option("--threads", f.threads, "worker threads, 0 for all cores");
  cut->callback([&] {
    if (f.input_dir.empty() == f.manifest.empty()) {
      throw CLI::ValidationError("cut", "exactly one of --input-dir and --manifest is required");
    }
  });

  CLI::App* tr = app.add_subcommand("train", "Train the classifier on the manifest's train split");
  tr->add_option("--manifest", f.manifest)->required()->check(CLI::ExistingFile);
  tr->add_option("--backbone", f.backbone)->check(CLI::IsMember(keys(kBackbones)));
  tr->add_option("--backbone-path", f.backbone_path, "feature extractor for the large backbone");
  tr->add_option("--epochs", f.epochs)->check(CLI::PositiveNumber);
  tr->add_option("--loss", f.loss)->check(CLI::IsMember(keys(kLosses)));
  tr->add_option("--batch-size", f.batch_size)->check(CLI::PositiveNumber);
  tr->add_option("--learning-rate", f.learning_rate)->check(CLI::PositiveNumber);
  seed(tr);
  tr->add_option("--out", f.out, "model directory")->required();

  CLI::App* ev = app.add_subcommand("eval", "Evaluate a model on one split");
  ev->add_option("--manifest", f.manifest)->required()->check(CLI::ExistingFile);
  ev->add_option("--model", f.model)->required()->check(CLI::ExistingDirectory);
  ev->add_option("--report", f.report, "metrics JSON (default <report.dir>/metrics.json)");
  ev->add_option("--split", f.split)->check(CLI::IsMember(keys(kSplits)));

  CLI::App* cam = app.add_subcommand("gradcam", "Grad-CAM overlay for one image");
  cam->add_option("--model", f.model)->required()->check(CLI::ExistingDirectory);
  cam->add_option("--image", f.image)->required()->check(CLI::ExistingFile);
  cam->add_option("--class", f.target_class, "class name or index")->required();
  cam->add_option("--alpha", f.alpha)->check(CLI::Range(0.0, 1.0));
  cam->add_option("--out", f.out, "overlay PNG; the raw heatmap goes to <out>.heatmap.png")->required();

  CLI::App* rep = app.add_subcommand("report", "Training curves and summary tables");
  rep->add_option("--history", f.history)->required()->check(CLI::ExistingFile);
  rep->add_option("--metrics", f.metrics)->required()->check(CLI::ExistingFile);
  rep->add_option("--output-dir", f.output_dir, "default report.dir from the config");

  CLI::App* syn = app.add_subcommand("synth", "Generate a separable two-class dataset with sidecars");
  syn->add_option("--output-dir", f.output_dir)->required();
  syn->add_option("--count", f.count)->check(CLI::NonNegativeNumber);
  seed(syn);
  syn->add_option("--size", f.size)->check(CLI::Range(32, 4096));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  }

  spdlog::set_level(spdlog::level::from_str(f.log_level));
  try {
    const PipelineConfig cfg = load_config(f);
    if (scan->parsed()) return run_scan(f);
    if (split->parsed()) return run_split(split, f, cfg);
    if (cut->parsed()) return run_cut(cut, f, cfg);
    if (tr->parsed()) return run_train(tr, f, cfg);
    if (ev->parsed()) return run_eval(f, cfg);
    if (cam->parsed()) return run_gradcam(f);
    if (rep->parsed()) return run_report(f, cfg);
    if (syn->parsed()) return run_synth(syn, f, cfg);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 2;
}

}  // namespace facecut::cli
