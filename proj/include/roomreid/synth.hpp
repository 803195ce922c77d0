// Copyright 2026 The roomreid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "roomreid/manifest.hpp"
#include "roomreid/records.hpp"

namespace roomreid::synth {

struct Range {
  std::size_t lo = 0;
  std::size_t hi = 0;
};

/// Synthetic room model: each room is a set of object prototypes laid out in a 640x480 frame,
/// plus keypoint prototypes. Views perturb everything with Gaussian noise and drop objects.
struct SynthSpec {
  std::size_t n_rooms = 8;
  Range objects_per_room{4, 10};
  std::size_t feature_dim = 32;
  Range keypoints_per_image{20, 40};
  /// Standard deviation of the additive feature noise, relative to unit-norm prototypes.
  double viewpoint_noise = 0.0;
  /// Per-view probability that an object (or keypoint) is not observed.
  double dropout = 0.0;
  /// Weight of the vector shared by every room's prototypes; higher means more look-alike rooms.
  double distractor_similarity = 0.5;
  /// Reference-pool images per room, besides the query views.
  std::size_t reference_pool_views = 3;
  /// Keypoint descriptor noise as a fraction of viewpoint_noise.
  double keypoint_noise_ratio = 0.4;
  std::uint64_t rng_seed = 0;

  /// Throws DataError on empty ranges, negative noise or dropout outside [0, 1).
  void validate() const;
};

nlohmann::json to_json(const SynthSpec& spec);
SynthSpec spec_from_json(const nlohmann::json& j, SynthSpec base = {});

struct Generated {
  manifest::Dataset dataset;
  std::map<std::string, std::string> truth;
};

/// Deterministic in spec.rng_seed. Emits `views_per_room` query views and
/// spec.reference_pool_views pool views per room. All floats are f32-exact and
/// survive a manifest round trip unchanged.
Generated generate(const SynthSpec& spec, std::size_t views_per_room);

}  // namespace roomreid::synth
