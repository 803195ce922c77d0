// Copyright 2026 The roomreid Authors
// SPDX-License-Identifier: Apache-2.0

// Small record builders shared by the unit tests.

#pragma once

#include <initializer_list>
#include <string>
#include <vector>

#include "roomreid/records.hpp"

namespace support {

inline roomreid::matching::FeatureVector fv(std::initializer_list<float> v) {
  return roomreid::matching::FeatureVector(std::vector<float>(v));
}

inline roomreid::SceneRecord record(std::string image, std::string room, roomreid::Split split,
                                    roomreid::matching::FeatureVector global) {
  return roomreid::SceneRecord{std::move(image), std::move(room), split, std::move(global), {}, {}, std::nullopt};
}

inline roomreid::ObjectInstance object(double x, double y, double w, double h, double conf,
                                       roomreid::matching::FeatureVector f) {
  return roomreid::ObjectInstance{roomreid::geometry::BoundingBox(x, y, w, h), conf, std::move(f)};
}

}  // namespace support
