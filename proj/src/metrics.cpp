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

#include "facecut/metrics.hpp"

#include <algorithm>
#include <fstream>

#include "facecut/classifier.hpp"
#include "facecut/dataset.hpp"
#include "facecut/errors.hpp"

namespace facecut {

void ConfusionMatrix::validate() const {
  if (counts.rows() != counts.cols()) throw InputError("confusion matrix must be square");
  if (counts.rows() < 2) throw InputError("confusion matrix needs at least two classes");
  if (static_cast<std::size_t>(counts.rows()) != class_names.size()) {
    throw InputError("confusion matrix size differs from the class list");
  }
  if ((counts.array() < 0).any()) throw InputError("confusion counts must be non-negative");
}

ConfusionMatrix confusion(std::span<const int> true_labels, std::span<const int> predicted_labels,
                          const std::vector<std::string>& class_names) {
  if (true_labels.empty()) throw InputError("no labels");
  if (true_labels.size() != predicted_labels.size()) throw InputError("label sequences differ in length");
  const auto n = static_cast<int>(class_names.size());
  ConfusionMatrix cm{CountMatrix::Zero(n, n), class_names};
  for (std::size_t k = 0; k < true_labels.size(); ++k) {
    const int t = true_labels[k], p = predicted_labels[k];
    if (t < 0 || t >= n || p < 0 || p >= n) throw InputError("label index out of range");
    ++cm.counts(t, p);
  }
  cm.validate();
  return cm;
}

ConfusionMatrix confusion(std::span<const std::string> true_labels,
                          std::span<const std::string> predicted_labels,
                          const std::vector<std::string>& class_names) {
  const auto index_of = [&](const std::string& label) {
    const auto it = std::find(class_names.begin(), class_names.end(), label);
    if (it == class_names.end()) throw InputError("unknown label '" + label + "'");
    return static_cast<int>(it - class_names.begin());
  };
  if (true_labels.size() != predicted_labels.size()) throw InputError("label sequences differ in length");
  std::vector<int> t, p;
  for (const auto& s : true_labels) t.push_back(index_of(s));
  for (const auto& s : predicted_labels) p.push_back(index_of(s));
  return confusion(t, p, class_names);
}

Rate mean_of_defined(std::span<const Rate> values) {
  double sum = 0;
  int n = 0;
  for (const Rate& v : values) {
    if (v) {
      sum += *v;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

namespace {

Rate ratio(std::int64_t num, std::int64_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

Rate weighted_mean(std::span<const Rate> values, std::span<const std::int64_t> weights) {
  double sum = 0;
  double total = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!values[i]) continue;
    sum += *values[i] * static_cast<double>(weights[i]);
    total += static_cast<double>(weights[i]);
  }
  if (total == 0) return std::nullopt;
  return sum / total;
}

}  // namespace

MetricsReport compute_metrics(const ConfusionMatrix& cm) {
  cm.validate();
  const auto n = static_cast<Eigen::Index>(cm.size());
  MetricsReport r;
  r.class_names = cm.class_names;
  r.confusion = cm.counts;
  const std::int64_t total = cm.counts.sum();
  if (total == 0) throw InputError("confusion matrix is empty");
  r.accuracy = static_cast<double>(cm.counts.trace()) / static_cast<double>(total);
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::int64_t diag = cm.counts(i, i);
    const std::int64_t row = cm.counts.row(i).sum();
    const std::int64_t col = cm.counts.col(i).sum();
    r.class_accuracy.push_back(ratio(diag, row));
    r.ppv.push_back(ratio(diag, col));
    r.support.push_back(row);
  }
  r.acsa = mean_of_defined(r.class_accuracy);
  r.recall = r.class_accuracy;
  r.precision = r.ppv;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Rate& p = r.precision[static_cast<std::size_t>(i)];
    const Rate& q = r.recall[static_cast<std::size_t>(i)];
    if (!p || !q) {
      r.f1.push_back(std::nullopt);
    } else if (*p + *q == 0) {
      r.f1.push_back(0.0);
    } else {
      r.f1.push_back(2 * *p * *q / (*p + *q));
    }
  }
  r.macro_avg = {mean_of_defined(r.precision), mean_of_defined(r.recall), mean_of_defined(r.f1), total};
  r.weighted_avg = {weighted_mean(r.precision, r.support), weighted_mean(r.recall, r.support),
                    weighted_mean(r.f1, r.support), total};
  return r;
}

// Serialization ------------------------------------------------------------------

namespace {

nlohmann::ordered_json rate_json(const Rate& v) { return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr); }

nlohmann::ordered_json rates_json(std::span<const Rate> values) {
  auto out = nlohmann::ordered_json::array();
  for (const Rate& v : values) out.push_back(rate_json(v));
  return out;
}

nlohmann::ordered_json averaged_json(const AveragedScores& s) {
  return {{"precision", rate_json(s.precision)},
          {"recall", rate_json(s.recall)},
          {"f1", rate_json(s.f1)},
          {"support", s.support}};
}

Rate rate_from(const nlohmann::json& v) {
  if (v.is_null()) return std::nullopt;
  return v.get<double>();
}

std::vector<Rate> rates_from(const nlohmann::json& v) {
  std::vector<Rate> out;
  for (const auto& item : v) out.push_back(rate_from(item));
  return out;
}

AveragedScores averaged_from(const nlohmann::json& v) {
  return {rate_from(v.at("precision")), rate_from(v.at("recall")), rate_from(v.at("f1")),
          v.at("support").get<std::int64_t>()};
}

}  // namespace

nlohmann::ordered_json to_json(const MetricsReport& r) {
  nlohmann::ordered_json doc;
  doc["class_names"] = r.class_names;
  auto rows = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < r.confusion.rows(); ++i) {
    auto row = nlohmann::ordered_json::array();
    for (Eigen::Index j = 0; j < r.confusion.cols(); ++j) row.push_back(r.confusion(i, j));
    rows.push_back(row);
  }
  doc["confusion_matrix"] = rows;
  doc["accuracy"] = r.accuracy;
  doc["class_accuracy"] = rates_json(r.class_accuracy);
  doc["acsa"] = rate_json(r.acsa);
  doc["ppv"] = rates_json(r.ppv);
  doc["precision"] = rates_json(r.precision);
  doc["recall"] = rates_json(r.recall);
  doc["f1"] = rates_json(r.f1);
  doc["support"] = r.support;
  doc["macro_avg"] = averaged_json(r.macro_avg);
  doc["weighted_avg"] = averaged_json(r.weighted_avg);
  return doc;
}

MetricsReport report_from_json(const nlohmann::json& doc) {
  try {
    MetricsReport r;
    r.class_names = doc.at("class_names").get<std::vector<std::string>>();
    const auto& rows = doc.at("confusion_matrix");
    const auto n = static_cast<Eigen::Index>(rows.size());
    r.confusion = CountMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (rows[static_cast<std::size_t>(i)].size() != static_cast<std::size_t>(n)) throw ParseError("confusion_matrix is not square");
      for (Eigen::Index j = 0; j < n; ++j) r.confusion(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].get<std::int64_t>();
    }
    r.accuracy = doc.at("accuracy").get<double>();
    r.class_accuracy = rates_from(doc.at("class_accuracy"));
    r.acsa = rate_from(doc.at("acsa"));
    r.ppv = rates_from(doc.at("ppv"));
    r.precision = rates_from(doc.at("precision"));
    r.recall = rates_from(doc.at("recall"));
    r.f1 = rates_from(doc.at("f1"));
    r.support = doc.at("support").get<std::vector<std::int64_t>>();
    r.macro_avg = averaged_from(doc.at("macro_avg"));
    r.weighted_avg = averaged_from(doc.at("weighted_avg"));
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed metrics report: ") + e.what());
  }
}

void write_report(const std::filesystem::path& path, const MetricsReport& report) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  out << to_json(report).dump(2) << '\n';
  if (!out) throw IoError("cannot write " + path.string());
}

MetricsReport read_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open report " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return report_from_json(doc);
}

Evaluation evaluate(const Classifier& model, const DatasetManifest& manifest, Split split,
                    const std::filesystem::path& report_path) {
  const LabeledBatch set = load_split(manifest, split, model.class_names());
  if (set.images.empty()) throw DataError(std::string("no records in the ") + std::string(to_string(split)) + " split");
  const std::vector<ClassProbs> probs = model.predict(set.images);
  std::vector<int> predicted;
  predicted.reserve(probs.size());
  for (const auto& p : probs) predicted.push_back(static_cast<int>(p.argmax()));
  Evaluation result{confusion(set.labels, predicted, model.class_names()), {}};
  result.report = compute_metrics(result.confusion);
  if (!report_path.empty()) write_report(report_path, result.report);
  return result;
}

}  // namespace facecut
