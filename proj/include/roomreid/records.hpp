// Copyright 2026 The roomreid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "roomreid/geometry.hpp"
#include "roomreid/matching.hpp"

namespace roomreid {

/// A detection reduced to box, confidence and appearance feature. Masks never reach the engine.
struct ObjectInstance {
  geometry::BoundingBox box;
  double confidence;
  matching::FeatureVector feature;

  friend bool operator==(const ObjectInstance&, const ObjectInstance&) = default;
};

enum class Split : std::uint8_t { kQuery = 0, kReferencePool = 1 };

std::string_view to_string(Split s) noexcept;

/// Everything the engine knows about one image.
struct SceneRecord {
  std::string image_id;
  std::string room_id;
  Split split = Split::kQuery;
  matching::FeatureVector global_feature;
  std::vector<ObjectInstance> objects;
  std::vector<matching::FeatureVector> keypoint_descriptors;
  /// Used only for reference selection; the global feature stands in when absent.
  std::optional<matching::FeatureVector> selection_embedding;

  const matching::FeatureVector& selection_or_global() const noexcept {
    return selection_embedding ? *selection_embedding : global_feature;
  }

  /// Objects whose confidence is at least the threshold, in original order.
  std::vector<ObjectInstance> objects_above(double threshold) const;

  /// Checks ids, confidences and that object/keypoint features share one dimension each.
  void validate() const;

  friend bool operator==(const SceneRecord&, const SceneRecord&) = default;
};

}  // namespace roomreid
