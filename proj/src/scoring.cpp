// Copyright 2026 The roomreid Authors
// SPDX-License-Identifier: Apache-2.0

#include "roomreid/scoring.hpp"

#include <algorithm>

#include "roomreid/error.hpp"

namespace roomreid::scoring {

std::string_view to_string(ScoreStrategy s) noexcept { return s == ScoreStrategy::kMean ? "mean" : "max"; }

ScoreStrategy parse_strategy(std::string_view name) {
  if (name == "mean") return ScoreStrategy::kMean;
  if (name == "max") return ScoreStrategy::kMax;
  throw DataError("unknown score strategy '" + std::string(name) + "' (expected mean or max)");
}

void ScoringConfig::validate() const {
  if (stage1_k == 0) throw DataError("stage1_k must be >= 1");
  if (stage2_k == 0) throw DataError("stage2_k must be >= 1");
  if (stage2_k > stage1_k) throw DataError("stage2_k must not exceed stage1_k");
  if (!(nms_iou >= 0.0 && nms_iou <= 1.0)) throw DataError("nms_iou must lie in [0, 1]");
  if (!(object_conf_threshold >= 0.0 && object_conf_threshold <= 1.0)) {
    throw DataError("object_conf_threshold must lie in [0, 1]");
  }
}

double aggregate(std::span<const double> scores, ScoreStrategy strategy) noexcept {
  if (scores.empty()) return 0.0;
  if (strategy == ScoreStrategy::kMax) return *std::max_element(scores.begin(), scores.end());
  double sum = 0.0;
  for (double s : scores) sum += s;
  return sum / static_cast<double>(scores.size());
}

ScoreBreakdown object_aware_score(double s_global,
                                  std::span<const matching::FeatureVector> query_patches,
                                  std::span<const matching::FeatureVector> ref_patches,
                                  std::span<const matching::FeatureVector> query_objects,
                                  std::span<const matching::FeatureVector> ref_objects,
                                  const ScoringConfig& cfg) {
  ScoreBreakdown out;
  if (cfg.use_global) out.s_global = s_global;
  if (cfg.use_patch) {
    out.s_patch = aggregate(matching::mutual_nearest_neighbors(query_patches, ref_patches).scores(), cfg.patch_strategy);
  }
  if (cfg.use_object) {
    out.s_object =
        aggregate(matching::mutual_nearest_neighbors(query_objects, ref_objects).scores(), cfg.object_strategy);
  }
  out.total = out.s_global + out.s_patch + out.s_object;
  return out;
}

std::vector<RankedCandidate> refine_candidates(std::vector<RankedCandidate> candidates, std::size_t k) {
  if (candidates.empty()) throw DataError("refine_candidates called with no candidates");
  std::sort(candidates.begin(), candidates.end(), [](const RankedCandidate& a, const RankedCandidate& b) {
    if (a.breakdown.total != b.breakdown.total) return a.breakdown.total > b.breakdown.total;
    if (a.stage1_rank != b.stage1_rank) return a.stage1_rank < b.stage1_rank;
    return a.candidate_id < b.candidate_id;
  });
  if (candidates.size() > k) candidates.resize(k);
  return candidates;
}

}  // namespace roomreid::scoring
