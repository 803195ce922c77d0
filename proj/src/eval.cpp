// Copyright 2026 The roomreid Authors
// SPDX-License-Identifier: Apache-2.0

#include "roomreid/eval.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <set>

#include "roomreid/error.hpp"

namespace roomreid::eval {

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> classes) : classes_(std::move(classes)) {
  std::sort(classes_.begin(), classes_.end());
  classes_.erase(std::unique(classes_.begin(), classes_.end()), classes_.end());
  counts_.assign(classes_.size() * classes_.size(), 0);
}

std::size_t ConfusionMatrix::index_of(const std::string& cls) const {
  const auto it = std::lower_bound(classes_.begin(), classes_.end(), cls);
  if (it == classes_.end() || *it != cls) throw DataError("class '" + cls + "' is not in the confusion matrix");
  return static_cast<std::size_t>(it - classes_.begin());
}

void ConfusionMatrix::add(const std::string& truth, const std::string& predicted) {
  ++counts_[index_of(truth) * classes_.size() + index_of(predicted)];
  ++total_;
}

std::size_t ConfusionMatrix::row_sum(std::size_t truth) const {
  std::size_t s = 0;
  for (std::size_t j = 0; j < classes_.size(); ++j) s += count(truth, j);
  return s;
}

std::size_t ConfusionMatrix::col_sum(std::size_t predicted) const {
  std::size_t s = 0;
  for (std::size_t i = 0; i < classes_.size(); ++i) s += count(i, predicted);
  return s;
}

std::size_t ConfusionMatrix::trace() const {
  std::size_t s = 0;
  for (std::size_t i = 0; i < classes_.size(); ++i) s += count(i, i);
  return s;
}

namespace {

double ratio(std::size_t num, std::size_t den) { return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den); }

}  // namespace

MetricReport score(const std::map<std::string, std::string>& predictions,
                   const std::map<std::string, std::string>& truth) {
  if (predictions.empty()) throw DataError("no predictions to score");
  std::vector<std::string> classes;
  std::set<std::string> truth_classes;
  for (const auto& [image, predicted] : predictions) {
    const auto it = truth.find(image);
    if (it == truth.end()) throw DataError("prediction for unknown image_id '" + image + "'");
    classes.push_back(it->second);
    classes.push_back(predicted);
    truth_classes.insert(it->second);
  }
  ConfusionMatrix cm(std::move(classes));
  for (const auto& [image, predicted] : predictions) cm.add(truth.at(image), predicted);

  MetricReport report;
  report.queries = cm.total();
  report.accuracy = ratio(cm.trace(), cm.total());
  for (const auto& cls : truth_classes) {
    const std::size_t i = cm.index_of(cls);
    ClassMetrics m;
    m.room_id = cls;
    m.support = cm.row_sum(i);
    m.precision = ratio(cm.count(i, i), cm.col_sum(i));
    m.recall = ratio(cm.count(i, i), m.support);
    m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    report.macro_precision += m.precision;
    report.macro_recall += m.recall;
    report.macro_f1 += m.f1;
    report.per_class.push_back(std::move(m));
  }
  const auto n = static_cast<double>(report.per_class.size());
  report.macro_precision /= n;
  report.macro_recall /= n;
  report.macro_f1 /= n;
  return report;
}

void attach_timings(MetricReport& report, std::span<const pipeline::RetrievalResult> results) {
  report.stage_timings_us.clear();
  for (auto label : pipeline::kStageLabels) report.stage_timings_us.emplace_back(std::string(label), 0.0);
  if (results.empty()) return;
  for (const auto& r : results) {
    for (const auto& [label, us] : r.timings) {
      for (auto& [name, total] : report.stage_timings_us) {
        if (name == label) total += static_cast<double>(us);
      }
    }
  }
  for (auto& [_, total] : report.stage_timings_us) total /= static_cast<double>(results.size());
}

std::string compare_table(std::span<const std::pair<std::string, MetricReport>> runs) {
  std::size_t label_width = 6;
  for (const auto& [label, _] : runs) label_width = std::max(label_width, label.size());
  auto values = [](const MetricReport& r) {
    return std::array<double, 4>{r.accuracy * 100.0, r.macro_precision * 100.0, r.macro_recall * 100.0,
                                 r.macro_f1 * 100.0};
  };
  // Best values are compared at printed precision.
  auto rounded = [](double v) { return fmt::format("{:.2f}", v); };
  std::array<double, 4> best{-1.0, -1.0, -1.0, -1.0};
  for (const auto& [_, report] : runs) {
    const auto v = values(report);
    for (std::size_t c = 0; c < 4; ++c) best[c] = std::max(best[c], std::stod(rounded(v[c])));
  }
  std::string out = fmt::format("{:<{}}  {:>10}  {:>10}  {:>10}  {:>10}\n", "Method", label_width, "Accuracy",
                                "Precision", "Recall", "F1");
  for (const auto& [label, report] : runs) {
    const auto v = values(report);
    out += fmt::format("{:<{}}", label, label_width);
    for (std::size_t c = 0; c < 4; ++c) {
      const std::string cell = rounded(v[c]);
      out += fmt::format("  {:>9}{}", cell, std::stod(cell) == best[c] ? '*' : ' ');
    }
    out += '\n';
  }
  return out;
}

std::string timing_table(std::span<const std::pair<std::string, MetricReport>> runs) {
  std::size_t label_width = 7;
  for (auto label : pipeline::kStageLabels) label_width = std::max(label_width, label.size());
  std::string out = fmt::format("{:<{}}", "Modules", label_width);
  for (const auto& [label, _] : runs) out += fmt::format("  {:>12}", label.substr(0, 12));
  out += fmt::format("\n{:<{}}", "", label_width);
  for (std::size_t i = 0; i < runs.size(); ++i) out += fmt::format("  {:>12}", "Runtime (ms)");
  out += '\n';
  std::vector<double> totals(runs.size(), 0.0);
  for (std::size_t s = 0; s < pipeline::kStageLabels.size(); ++s) {
    out += fmt::format("{:<{}}", pipeline::kStageLabels[s], label_width);
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const auto& t = runs[i].second.stage_timings_us;
      const double ms = s < t.size() ? t[s].second / 1000.0 : 0.0;
      totals[i] += ms;
      out += fmt::format("  {:>12.3f}", ms);
    }
    out += '\n';
  }
  out += fmt::format("{:<{}}", "Total", label_width);
  for (double t : totals) out += fmt::format("  {:>12.3f}", t);
  out += '\n';
  return out;
}

nlohmann::ordered_json report_record(const std::string& label, const MetricReport& report) {
  nlohmann::ordered_json j;
  j["schema"] = "roomreid.metrics/1";
  j["label"] = label;
  j["queries"] = report.queries;
  j["accuracy"] = report.accuracy;
  j["macro_precision"] = report.macro_precision;
  j["macro_recall"] = report.macro_recall;
  j["macro_f1"] = report.macro_f1;
  j["per_class"] = nlohmann::ordered_json::array();
  for (const auto& c : report.per_class) {
    j["per_class"].push_back(
        {{"room_id", c.room_id}, {"precision", c.precision}, {"recall", c.recall}, {"f1", c.f1}, {"support", c.support}});
  }
  j["stage_timings_us"] = nlohmann::ordered_json::object();
  for (const auto& [label_name, us] : report.stage_timings_us) j["stage_timings_us"][label_name] = us;
  return j;
}

std::vector<Ablation> ablation_set(const scoring::ScoringConfig& base) {
  auto with = [&](bool patch, bool object, bool fine, bool global) {
    auto cfg = base;
    cfg.use_patch = patch;
    cfg.use_object = object;
    cfg.use_fine_grained = fine;
    cfg.use_global = global;
    return cfg;
  };
  return {
      {"Full", with(true, true, true, true)},
      {"w/o s_patch", with(false, true, true, true)},
      {"w/o s_object", with(true, false, true, true)},
      {"w/o FGR", with(true, true, false, true)},
      {"w/o s_patch & s_object", with(false, false, true, true)},
      {"w/o s_patch & FGR", with(false, true, false, true)},
      {"w/o s_object & FGR", with(true, false, false, true)},
      {"Global only", with(false, false, false, true)},
      {"w/o s_global", with(true, true, true, false)},
  };
}

std::map<std::string, std::string> predictions_of(std::span<const pipeline::BatchItem> items) {
  std::map<std::string, std::string> out;
  for (const auto& item : items) {
    if (const auto* r = std::get_if<pipeline::RetrievalResult>(&item)) out[r->query_image_id] = r->final_room_id;
  }
  return out;
}

std::vector<LabeledResults> run_ablations(std::span<const SceneRecord> queries,
                                          const std::map<std::string, std::string>& truth,
                                          const database::ReferenceDatabase& db,
                                          const scoring::ScoringConfig& base,
                                          const ProviderBundle& providers,
                                          std::size_t workers) {
  std::vector<LabeledResults> out;
  for (auto& [label, cfg] : ablation_set(base)) {
    auto items = pipeline::query_batch(queries, db, cfg, providers, workers);
    auto report = score(predictions_of(items), truth);
    std::vector<pipeline::RetrievalResult> ok;
    for (const auto& item : items) {
      if (const auto* r = std::get_if<pipeline::RetrievalResult>(&item)) ok.push_back(*r);
    }
    attach_timings(report, ok);
    out.push_back({std::move(label), std::move(report), std::move(items)});
  }
  return out;
}

}  // namespace roomreid::eval
