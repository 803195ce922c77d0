// Copyright 2026 The roomreid Authors
// SPDX-License-Identifier: Apache-2.0

// Little-endian framing shared by the manifest and index formats.
//
// Every file is laid out as
//   magic[4] | u32 version | u64 total_size | body ... | u32 crc32
// where total_size counts every byte including the trailer and the CRC covers
// everything before it.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "roomreid/matching.hpp"
#include "roomreid/records.hpp"

namespace roomreid::io {

class ByteWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f32(float v);
  void f64(double v);
  void str(std::string_view s);
  void raw(std::span<const std::uint8_t> bytes) { buf_.insert(buf_.end(), bytes.begin(), bytes.end()); }
  void floats(std::span<const float> v);

  std::size_t size() const noexcept { return buf_.size(); }
  std::vector<std::uint8_t>& bytes() noexcept { return buf_; }
  void patch_u64(std::size_t at, std::uint64_t v);

 private:
  std::vector<std::uint8_t> buf_;
};

/// Bounds-checked reader; running past the end throws TruncatedFile.
class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> data, std::string context) : data_(data), context_(std::move(context)) {}

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  float f32();
  double f64();
  std::string str();
  std::vector<float> floats(std::size_t n);

  std::size_t pos() const noexcept { return pos_; }
  void seek(std::size_t pos);
  std::size_t remaining() const noexcept { return data_.size() - pos_; }
  const std::string& context() const noexcept { return context_; }

 private:
  void need(std::size_t n);

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
  std::string context_;
};

std::uint32_t crc32(std::span<const std::uint8_t> bytes) noexcept;

constexpr std::size_t kHeaderSize = 16;
constexpr std::size_t kTrailerSize = 4;

/// Starts a framed file; the size field is patched by finish_frame.
void begin_frame(ByteWriter& w, std::array<char, 4> magic, std::uint32_t version);
void finish_frame(ByteWriter& w);

/// Validates magic, version, size and checksum in that order; returns the body span.
std::span<const std::uint8_t> open_frame(std::span<const std::uint8_t> file,
                                         std::array<char, 4> magic,
                                         std::uint32_t version,
                                         const std::string& context);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
/// Writes to a sibling temp file, then renames it into place.
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

/// Per-dimension layout a record is encoded against.
struct RecordDims {
  std::uint32_t global = 0;
  std::uint32_t selection = 0;
  std::uint32_t object = 0;
  std::uint32_t keypoint = 0;
};

void write_record(ByteWriter& w, const SceneRecord& r, const RecordDims& dims);
SceneRecord read_record(ByteReader& r, const RecordDims& dims);

/// Dimensions shared by a record set; throws DimensionMismatch on disagreement.
RecordDims infer_dims(std::span<const SceneRecord> records);

void check_dims(const SceneRecord& r, const RecordDims& dims);

}  // namespace roomreid::io
