// Copyright 2026 The roomreid Authors
// SPDX-License-Identifier: Apache-2.0

#include "roomreid/error.hpp"

#include <utility>

namespace roomreid {

DimensionMismatch::DimensionMismatch(const std::string& what, std::size_t expected, std::size_t actual)
    : DataError(what + ": dimension mismatch (" + std::to_string(expected) + " vs " + std::to_string(actual) + ")"),
      expected_(expected),
      actual_(actual) {}

ProviderError::ProviderError(std::string stage, std::string image_id, const std::string& cause)
    : std::runtime_error("provider failure in stage '" + stage + "' for image '" + image_id + "': " + cause),
      stage_(std::move(stage)),
      image_id_(std::move(image_id)) {}

}  // namespace roomreid
