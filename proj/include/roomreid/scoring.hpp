// Copyright 2026 The roomreid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "roomreid/matching.hpp"

namespace roomreid::scoring {

enum class ScoreStrategy { kMean, kMax };

std::string_view to_string(ScoreStrategy s) noexcept;
/// Accepts "mean" or "max"; throws DataError otherwise.
ScoreStrategy parse_strategy(std::string_view name);

struct ScoreBreakdown {
  double s_global = 0.0;
  double s_patch = 0.0;
  double s_object = 0.0;
  double total = 0.0;
  friend bool operator==(const ScoreBreakdown&, const ScoreBreakdown&) = default;
};

/// Stage fan-outs, aggregation strategies and ablation switches for the cascade.
struct ScoringConfig {
  ScoreStrategy patch_strategy = ScoreStrategy::kMax;
  ScoreStrategy object_strategy = ScoreStrategy::kMean;
  bool use_global = true;
  bool use_patch = true;
  bool use_object = true;
  bool use_fine_grained = true;
  std::size_t stage1_k = 5;
  std::size_t stage2_k = 2;
  double nms_iou = 0.5;
  double object_conf_threshold = 0.0;

  /// Throws DataError when fan-outs or thresholds are out of range.
  void validate() const;

  friend bool operator==(const ScoringConfig&, const ScoringConfig&) = default;
};

/// Mean or max of the MNN scores; an empty set scores 0.
double aggregate(std::span<const double> scores, ScoreStrategy strategy) noexcept;

/// s_global + s_patch + s_object with disabled terms contributing exactly 0.
ScoreBreakdown object_aware_score(double s_global,
                                  std::span<const matching::FeatureVector> query_patches,
                                  std::span<const matching::FeatureVector> ref_patches,
                                  std::span<const matching::FeatureVector> query_objects,
                                  std::span<const matching::FeatureVector> ref_objects,
                                  const ScoringConfig& cfg);

struct RankedCandidate {
  std::string candidate_id;
  std::size_t stage1_rank = 0;
  ScoreBreakdown breakdown;
};

/// Sorts by descending total, then ascending stage-1 rank, then id; keeps the first k.
/// Throws DataError on an empty candidate list.
std::vector<RankedCandidate> refine_candidates(std::vector<RankedCandidate> candidates, std::size_t k);

}  // namespace roomreid::scoring
