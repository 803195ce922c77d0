// Copyright 2026 The roomreid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "roomreid/database.hpp"
#include "roomreid/providers.hpp"
#include "roomreid/records.hpp"
#include "roomreid/scoring.hpp"

namespace roomreid::pipeline {

/// Per-stage timing labels, in cascade order.
inline constexpr std::array<std::string_view, 7> kStageLabels{
    "Global Feature Extractor", "Global Retrieval",         "Instance Segmentation", "Receptive Field Expander",
    "Object Feature Extractor", "Object-Aware Scoring",     "Fine-Grained Retrieval",
};

struct Stage1Entry {
  std::string room_id;
  double s_global = 0.0;
  friend bool operator==(const Stage1Entry&, const Stage1Entry&) = default;
};

struct Stage2Entry {
  std::string room_id;
  scoring::ScoreBreakdown breakdown;
  friend bool operator==(const Stage2Entry&, const Stage2Entry&) = default;
};

/// Full trace of one query through the cascade.
struct RetrievalResult {
  std::string query_image_id;
  std::vector<Stage1Entry> stage1;
  std::vector<Stage2Entry> stage2;
  std::string final_room_id;
  std::map<std::string, std::size_t> fine_match_counts;
  /// Microseconds per stage, keyed by the labels in kStageLabels (always all seven).
  std::vector<std::pair<std::string, std::int64_t>> timings;

  /// Equality ignoring timings.
  bool same_outcome(const RetrievalResult& other) const;
};

/// Runs the three-stage cascade for one query. Throws DimensionMismatch, DataError on an
/// empty database, and ProviderError naming the stage and image when a provider fails.
RetrievalResult query(const SceneRecord& q,
                      const database::ReferenceDatabase& db,
                      const scoring::ScoringConfig& cfg,
                      const ProviderBundle& providers);

/// Either a result or the error message for that query.
using BatchItem = std::variant<RetrievalResult, std::string>;

/// Elementwise query() over up to `workers` threads; output order matches input order and a
/// failing query only affects its own slot.
std::vector<BatchItem> query_batch(std::span<const SceneRecord> queries,
                                   const database::ReferenceDatabase& db,
                                   const scoring::ScoringConfig& cfg,
                                   const ProviderBundle& providers,
                                   std::size_t workers = 1);

inline constexpr std::string_view kTraceSchema = "roomreid.trace/1";

/// One self-describing JSON object per query; written one per line.
nlohmann::ordered_json trace_record(const RetrievalResult& r);
nlohmann::ordered_json trace_error(const std::string& query_image_id, const std::string& message);
RetrievalResult parse_trace(const nlohmann::ordered_json& j);

}  // namespace roomreid::pipeline
