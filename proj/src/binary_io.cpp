// Copyright 2026 The roomreid Authors
// SPDX-License-Identifier: Apache-2.0

#include "binary_io.hpp"

#include <zlib.h>

#include <bit>
#include <fstream>
#include <iterator>

#include "roomreid/error.hpp"

namespace roomreid::io {

void ByteWriter::u32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::u64(std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
void ByteWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void ByteWriter::str(std::string_view s) {
  u32(static_cast<std::uint32_t>(s.size()));
  buf_.insert(buf_.end(), s.begin(), s.end());
}

void ByteWriter::floats(std::span<const float> v) {
  for (float f : v) f32(f);
}

void ByteWriter::patch_u64(std::size_t at, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf_.at(at + i) = static_cast<std::uint8_t>(v >> (8 * i));
}

void ByteReader::need(std::size_t n) {
  if (remaining() < n) throw TruncatedFile(context_ + ": unexpected end of data");
}

std::uint8_t ByteReader::u8() {
  need(1);
  return data_[pos_++];
}

std::uint32_t ByteReader::u32() {
  need(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_++]) << (8 * i);
  return v;
}

std::uint64_t ByteReader::u64() {
  need(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[pos_++]) << (8 * i);
  return v;
}

float ByteReader::f32() { return std::bit_cast<float>(u32()); }
double ByteReader::f64() { return std::bit_cast<double>(u64()); }

std::string ByteReader::str() {
  const std::uint32_t n = u32();
  need(n);
  std::string s(reinterpret_cast<const char*>(data_.data() + pos_), n);
  pos_ += n;
  return s;
}

std::vector<float> ByteReader::floats(std::size_t n) {
  need(n * 4);
  std::vector<float> out(n);
  for (auto& f : out) f = f32();
  return out;
}

void ByteReader::seek(std::size_t pos) {
  if (pos > data_.size()) throw TruncatedFile(context_ + ": offset beyond end of data");
  pos_ = pos;
}

std::uint32_t crc32(std::span<const std::uint8_t> bytes) noexcept {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks to stay within range.
  std::size_t done = 0;
  while (done < bytes.size()) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - done, 1u << 30));
    crc = ::crc32(crc, bytes.data() + done, chunk);
    done += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

void begin_frame(ByteWriter& w, std::array<char, 4> magic, std::uint32_t version) {
  for (char c : magic) w.u8(static_cast<std::uint8_t>(c));
  w.u32(version);
  w.u64(0);
}

void finish_frame(ByteWriter& w) {
  w.patch_u64(8, w.size() + kTrailerSize);
  w.u32(crc32(w.bytes()));
}

std::span<const std::uint8_t> open_frame(std::span<const std::uint8_t> file,
                                         std::array<char, 4> magic,
                                         std::uint32_t version,
                                         const std::string& context) {
  if (file.size() < kHeaderSize + kTrailerSize) throw TruncatedFile(context + ": file too short");
  for (std::size_t i = 0; i < 4; ++i) {
    if (file[i] != static_cast<std::uint8_t>(magic[i])) throw FormatError(context + ": bad magic bytes");
  }
  ByteReader header(file.first(kHeaderSize), context);
  header.seek(4);
  const std::uint32_t found_version = header.u32();
  if (found_version != version) {
    throw VersionMismatch(context + ": format version " + std::to_string(found_version) + ", expected " +
                          std::to_string(version));
  }
  const std::uint64_t declared = header.u64();
  if (file.size() < declared) {
    throw TruncatedFile(context + ": file holds " + std::to_string(file.size()) + " bytes, header declares " +
                        std::to_string(declared));
  }
  if (file.size() > declared) throw FormatError(context + ": trailing bytes after declared end");
  ByteReader trailer(file.last(kTrailerSize), context);
  const std::uint32_t stored = trailer.u32();
  if (crc32(file.first(file.size() - kTrailerSize)) != stored) {
    throw ChecksumMismatch(context + ": checksum mismatch");
  }
  return file.subspan(kHeaderSize, file.size() - kHeaderSize - kTrailerSize);
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + tmp + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("short write to '" + tmp + "'");
  }
  std::filesystem::rename(tmp, path);
}

void check_dims(const SceneRecord& r, const RecordDims& dims) {
  if (r.global_feature.dim() != dims.global) {
    throw DimensionMismatch("global feature of '" + r.image_id + "'", dims.global, r.global_feature.dim());
  }
  if (r.selection_embedding && r.selection_embedding->dim() != dims.selection) {
    throw DimensionMismatch("selection embedding of '" + r.image_id + "'", dims.selection,
                            r.selection_embedding->dim());
  }
  for (const auto& o : r.objects) {
    if (o.feature.dim() != dims.object) {
      throw DimensionMismatch("object feature of '" + r.image_id + "'", dims.object, o.feature.dim());
    }
  }
  for (const auto& k : r.keypoint_descriptors) {
    if (k.dim() != dims.keypoint) {
      throw DimensionMismatch("keypoint descriptor of '" + r.image_id + "'", dims.keypoint, k.dim());
    }
  }
}

RecordDims infer_dims(std::span<const SceneRecord> records) {
  RecordDims dims;
  for (const auto& r : records) {
    if (dims.global == 0) dims.global = static_cast<std::uint32_t>(r.global_feature.dim());
    if (dims.selection == 0 && r.selection_embedding) {
      dims.selection = static_cast<std::uint32_t>(r.selection_embedding->dim());
    }
    if (dims.object == 0 && !r.objects.empty()) dims.object = static_cast<std::uint32_t>(r.objects[0].feature.dim());
    if (dims.keypoint == 0 && !r.keypoint_descriptors.empty()) {
      dims.keypoint = static_cast<std::uint32_t>(r.keypoint_descriptors[0].dim());
    }
  }
  for (const auto& r : records) check_dims(r, dims);
  return dims;
}

void write_record(ByteWriter& w, const SceneRecord& r, const RecordDims& dims) {
  check_dims(r, dims);
  w.str(r.image_id);
  w.str(r.room_id);
  w.u8(static_cast<std::uint8_t>(r.split));
  w.floats(r.global_feature.values());
  w.u8(r.selection_embedding ? 1 : 0);
  if (r.selection_embedding) w.floats(r.selection_embedding->values());
  w.u32(static_cast<std::uint32_t>(r.objects.size()));
  for (const auto& o : r.objects) {
    w.f32(static_cast<float>(o.box.x()));
    w.f32(static_cast<float>(o.box.y()));
    w.f32(static_cast<float>(o.box.w()));
    w.f32(static_cast<float>(o.box.h()));
    w.f32(static_cast<float>(o.confidence));
    w.floats(o.feature.values());
  }
  w.u32(static_cast<std::uint32_t>(r.keypoint_descriptors.size()));
  for (const auto& k : r.keypoint_descriptors) w.floats(k.values());
}

SceneRecord read_record(ByteReader& r, const RecordDims& dims) {
  auto image_id = r.str();
  auto room_id = r.str();
  const std::uint8_t split = r.u8();
  if (split > 1) throw FormatError(r.context() + ": record '" + image_id + "' has an unknown split tag");
  SceneRecord rec{std::move(image_id), std::move(room_id), static_cast<Split>(split),
                  matching::FeatureVector(r.floats(dims.global)), {}, {}, std::nullopt};
  if (r.u8() != 0) {
    if (dims.selection == 0) throw FormatError(r.context() + ": selection embedding present but dimension is 0");
    rec.selection_embedding = matching::FeatureVector(r.floats(dims.selection));
  }
  const std::uint32_t n_objects = r.u32();
  for (std::uint32_t i = 0; i < n_objects; ++i) {
    const float x = r.f32(), y = r.f32(), w = r.f32(), h = r.f32();
    const float conf = r.f32();
    rec.objects.push_back({geometry::BoundingBox(x, y, w, h), conf, matching::FeatureVector(r.floats(dims.object))});
  }
  const std::uint32_t n_keypoints = r.u32();
  for (std::uint32_t i = 0; i < n_keypoints; ++i) {
    rec.keypoint_descriptors.emplace_back(r.floats(dims.keypoint));
  }
  rec.validate();
  return rec;
}

}  // namespace roomreid::io
