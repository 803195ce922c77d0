// Copyright 2026 The roomreid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "roomreid/scoring.hpp"

namespace roomreid::config {

/// Keys mirror ScoringConfig field names. Unknown keys are rejected.
nlohmann::json to_json(const scoring::ScoringConfig& cfg);

/// Starts from `base` and overrides whatever keys are present.
scoring::ScoringConfig from_json(const nlohmann::json& j, scoring::ScoringConfig base = {});

scoring::ScoringConfig load(const std::filesystem::path& path);

/// Compact serialisation with sorted keys, stable across runs.
std::string canonical(const scoring::ScoringConfig& cfg);

}  // namespace roomreid::config
