// Copyright 2026 The roomreid Authors
// SPDX-License-Identifier: Apache-2.0

#include "roomreid/records.hpp"

#include "roomreid/error.hpp"

namespace roomreid {

std::string_view to_string(Split s) noexcept { return s == Split::kQuery ? "query" : "referencepool"; }

std::vector<ObjectInstance> SceneRecord::objects_above(double threshold) const {
  std::vector<ObjectInstance> out;
  for (const auto& o : objects) {
    if (o.confidence >= threshold) out.push_back(o);
  }
  return out;
}

void SceneRecord::validate() const {
  if (image_id.empty()) throw DataError("record has an empty image_id");
  if (room_id.empty()) throw DataError("record '" + image_id + "' has an empty room_id");
  for (const auto& o : objects) {
    if (!(o.confidence >= 0.0 && o.confidence <= 1.0)) {
      throw DataError("record '" + image_id + "' has an object confidence outside [0, 1]");
    }
    if (o.feature.dim() != objects.front().feature.dim()) {
      throw DimensionMismatch("object features of '" + image_id + "'", objects.front().feature.dim(), o.feature.dim());
    }
  }
  for (const auto& k : keypoint_descriptors) {
    if (k.dim() != keypoint_descriptors.front().dim()) {
      throw DimensionMismatch("keypoint descriptors of '" + image_id + "'", keypoint_descriptors.front().dim(),
                              k.dim());
    }
  }
}

}  // namespace roomreid
