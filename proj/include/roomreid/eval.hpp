// Copyright 2026 The roomreid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "roomreid/database.hpp"
#include "roomreid/pipeline.hpp"
#include "roomreid/scoring.hpp"

namespace roomreid::eval {

/// Rows are ground truth, columns are predictions. Classes are the sorted union of both.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::vector<std::string> classes);

  void add(const std::string& truth, const std::string& predicted);

  const std::vector<std::string>& classes() const noexcept { return classes_; }
  std::size_t count(std::size_t truth, std::size_t predicted) const { return counts_.at(truth * classes_.size() + predicted); }
  std::size_t row_sum(std::size_t truth) const;
  std::size_t col_sum(std::size_t predicted) const;
  std::size_t trace() const;
  std::size_t total() const noexcept { return total_; }
  std::size_t index_of(const std::string& cls) const;

 private:
  std::vector<std::string> classes_;
  std::vector<std::size_t> counts_;
  std::size_t total_ = 0;
};

struct ClassMetrics {
  std::string room_id;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct MetricReport {
  double accuracy = 0.0;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  std::size_t queries = 0;
  std::vector<ClassMetrics> per_class;
  /// Mean microseconds per stage label, in cascade order. Empty when no timings were supplied.
  std::vector<std::pair<std::string, double>> stage_timings_us;
};

/// Macro precision/recall/F1 over classes present in the ground truth; an empty denominator
/// counts as 0. Throws DataError for an empty prediction set or an image id unknown to truth.
MetricReport score(const std::map<std::string, std::string>& predictions,
                   const std::map<std::string, std::string>& truth);

/// Adds mean per-stage timings from a set of results to the report.
void attach_timings(MetricReport& report, std::span<const pipeline::RetrievalResult> results);

/// Fixed-layout table: Accuracy/Precision/Recall/F1 as 2-decimal percentages, with the best
/// value in each column marked by '*'.
std::string compare_table(std::span<const std::pair<std::string, MetricReport>> runs);

/// Per-stage mean milliseconds for each run.
std::string timing_table(std::span<const std::pair<std::string, MetricReport>> runs);

/// One self-describing metrics record, for line-oriented output.
nlohmann::ordered_json report_record(const std::string& label, const MetricReport& report);

struct Ablation {
  std::string label;
  scoring::ScoringConfig config;
};

/// The fixed ablation set: full, the six single/double removals of {s_patch, s_object, FGR},
/// the global-only baseline, and finally the run without s_global.
std::vector<Ablation> ablation_set(const scoring::ScoringConfig& base);

struct LabeledResults {
  std::string label;
  MetricReport report;
  std::vector<pipeline::BatchItem> items;
};

/// Runs every configuration of ablation_set over the queries. Failed queries are not scored.
std::vector<LabeledResults> run_ablations(std::span<const SceneRecord> queries,
                                          const std::map<std::string, std::string>& truth,
                                          const database::ReferenceDatabase& db,
                                          const scoring::ScoringConfig& base,
                                          const ProviderBundle& providers,
                                          std::size_t workers = 1);

/// Predictions from the successful items of a batch.
std::map<std::string, std::string> predictions_of(std::span<const pipeline::BatchItem> items);

}  // namespace roomreid::eval
