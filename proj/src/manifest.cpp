// Copyright 2026 The roomreid Authors
// SPDX-License-Identifier: Apache-2.0

#include "roomreid/manifest.hpp"

#include <set>

#include "binary_io.hpp"
#include "roomreid/error.hpp"

namespace roomreid::manifest {

namespace {

constexpr std::array<char, 4> kHeaderMagic{'R', 'R', 'M', 'F'};
constexpr std::array<char, 4> kRecordsMagic{'R', 'R', 'R', 'C'};

void check_unique_ids(const std::vector<SceneRecord>& records) {
  std::set<std::string> seen;
  for (const auto& r : records) {
    if (!seen.insert(r.image_id).second) throw DataError("duplicate image_id '" + r.image_id + "' in dataset");
  }
}

}  // namespace

std::vector<SceneRecord> Dataset::split(Split which) const {
  std::vector<SceneRecord> out;
  for (const auto& r : records) {
    if (r.split == which) out.push_back(r);
  }
  return out;
}

void write(const Dataset& dataset, const std::filesystem::path& dir) {
  check_unique_ids(dataset.records);
  for (const auto& r : dataset.records) r.validate();
  const io::RecordDims dims = io::infer_dims(dataset.records);

  io::ByteWriter body;
  io::begin_frame(body, kRecordsMagic, kFormatVersion);
  std::vector<std::uint64_t> offsets;
  offsets.reserve(dataset.records.size());
  for (const auto& r : dataset.records) {
    offsets.push_back(body.size());
    io::write_record(body, r, dims);
  }
  io::finish_frame(body);

  io::ByteWriter head;
  io::begin_frame(head, kHeaderMagic, kFormatVersion);
  head.str(dataset.name);
  head.u32(dims.global);
  head.u32(dims.selection);
  head.u32(dims.object);
  head.u32(dims.keypoint);
  head.f32(dataset.confidence_floor);
  head.u64(offsets.size());
  for (auto off : offsets) head.u64(off);
  head.u64(body.size());
  head.u32(io::crc32(body.bytes()));
  io::finish_frame(head);

  std::filesystem::create_directories(dir);
  io::write_file(dir / kRecordsFile, body.bytes());
  io::write_file(dir / kHeaderFile, head.bytes());
}

Dataset read(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw NotFoundError("manifest not found: '" + dir.string() + "'");
  const auto head_path = dir / kHeaderFile;
  const auto body_path = dir / kRecordsFile;
  if (!std::filesystem::exists(head_path)) throw NotFoundError("manifest not found: '" + head_path.string() + "'");
  if (!std::filesystem::exists(body_path)) throw NotFoundError("manifest records not found: '" + body_path.string() + "'");

  const auto head_bytes = io::read_file(head_path);
  io::ByteReader head(io::open_frame(head_bytes, kHeaderMagic, kFormatVersion, head_path.string()), head_path.string());
  Dataset out;
  out.name = head.str();
  io::RecordDims dims;
  dims.global = head.u32();
  dims.selection = head.u32();
  dims.object = head.u32();
  dims.keypoint = head.u32();
  out.confidence_floor = head.f32();
  const std::uint64_t count = head.u64();
  if (dims.global == 0 && count > 0) throw FormatError(head_path.string() + ": global feature dimension is 0");
  if (count > head.remaining() / 8) throw TruncatedFile(head_path.string() + ": record offset table is short");
  std::vector<std::uint64_t> offsets(count);
  for (auto& off : offsets) off = head.u64();
  const std::uint64_t body_size = head.u64();
  const std::uint32_t body_crc = head.u32();
  if (head.remaining() != 0) throw FormatError(head_path.string() + ": unexpected bytes after header fields");

  const auto body_bytes = io::read_file(body_path);
  if (body_bytes.size() < body_size) throw TruncatedFile(body_path.string() + ": shorter than the header declares");
  if (body_bytes.size() != body_size || io::crc32(body_bytes) != body_crc) {
    throw ChecksumMismatch(body_path.string() + ": does not match the checksum recorded in the manifest header");
  }
  const auto body_span = io::open_frame(body_bytes, kRecordsMagic, kFormatVersion, body_path.string());
  io::ByteReader body(body_span, body_path.string());
  out.records.reserve(count);
  for (auto off : offsets) {
    if (off < io::kHeaderSize || off - io::kHeaderSize != body.pos()) {
      throw FormatError(body_path.string() + ": record offset table disagrees with record layout");
    }
    out.records.push_back(io::read_record(body, dims));
  }
  if (body.remaining() != 0) throw FormatError(body_path.string() + ": bytes left after the last record");
  check_unique_ids(out.records);
  return out;
}

}  // namespace roomreid::manifest
