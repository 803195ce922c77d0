// Copyright 2026 The roomreid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "roomreid/geometry.hpp"
#include "roomreid/providers.hpp"
#include "roomreid/records.hpp"
#include "roomreid/scoring.hpp"

namespace roomreid::database {

inline constexpr std::uint32_t kIndexVersion = 1;

struct PatchEntry {
  geometry::PatchBox patch;
  matching::FeatureVector feature;
  friend bool operator==(const PatchEntry&, const PatchEntry&) = default;
};

/// One reference image per room plus its precomputed patch features. Rooms iterate in id order.
struct ReferenceDatabase {
  std::map<std::string, SceneRecord> refs;
  std::map<std::string, std::vector<PatchEntry>> patches;
  scoring::ScoringConfig build_config;
  std::uint32_t format_version = kIndexVersion;

  std::size_t room_count() const noexcept { return refs.size(); }

  friend bool operator==(const ReferenceDatabase&, const ReferenceDatabase&) = default;
};

/// Centers -> Delaunay adjacency -> receptive-field expansion -> NMS over the given detections.
std::vector<geometry::PatchBox> object_patches(std::span<const ObjectInstance> objects, double nms_iou);

/// Image whose selection embedding is nearest the centroid of all candidates' embeddings
/// (single-cluster k-means). Ties go to the smaller image_id. Records without an embedding
/// fall back to their global feature, but mixing the two within one room is rejected.
std::string select_reference(std::span<const SceneRecord> candidates);

/// Groups records by room, picks one reference each, drops objects below the confidence
/// threshold and precomputes patch features through the provider bundle.
ReferenceDatabase build_database(std::span<const SceneRecord> records,
                                 const scoring::ScoringConfig& cfg,
                                 const ProviderBundle& providers);

/// Serialised index bytes; identical databases produce identical bytes.
std::vector<std::uint8_t> serialize(const ReferenceDatabase& db);
ReferenceDatabase deserialize(std::span<const std::uint8_t> bytes, const std::string& context = "index");

void save_database(const ReferenceDatabase& db, const std::filesystem::path& path);
/// Throws VersionMismatch, TruncatedFile or ChecksumMismatch on damaged files; never returns partial data.
ReferenceDatabase load_database(const std::filesystem::path& path);

}  // namespace roomreid::database
