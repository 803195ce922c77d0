// Copyright 2026 The roomreid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "roomreid/records.hpp"

namespace roomreid::manifest {

inline constexpr std::uint32_t kFormatVersion = 1;
inline constexpr const char* kHeaderFile = "manifest";
inline constexpr const char* kRecordsFile = "records.bin";

/// A dataset as stored on disk: a directory holding a `manifest` header and `records.bin`.
///
/// Header body: dataset name, global/selection/object/keypoint dimensions,
/// the confidence floor already applied by the producer, record count, one
/// byte offset per record into records.bin, and the size and CRC-32 of
/// records.bin. Both files use the shared frame (magic, version, total size,
/// CRC-32 trailer). All numbers little-endian; features and boxes are f32;
/// strings are u32-length-prefixed bytes.
struct Dataset {
  std::string name;
  /// Detections below this confidence were already dropped by the producer.
  float confidence_floor = 0.0f;
  std::vector<SceneRecord> records;

  std::vector<SceneRecord> split(Split which) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Creates the directory if needed. Throws DataError on inconsistent dimensions or duplicate image ids.
void write(const Dataset& dataset, const std::filesystem::path& dir);

/// Throws NotFoundError when the directory or its files are missing, and the FormatError
/// family (VersionMismatch, TruncatedFile, ChecksumMismatch) on damaged files.
Dataset read(const std::filesystem::path& dir);

}  // namespace roomreid::manifest
