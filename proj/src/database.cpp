// Copyright 2026 The roomreid Authors
// SPDX-License-Identifier: Apache-2.0

#include "roomreid/database.hpp"

#include <algorithm>
#include <limits>
#include <set>

#include "binary_io.hpp"
#include "roomreid/config.hpp"
#include "roomreid/error.hpp"

namespace roomreid::database {

namespace {

constexpr std::array<char, 4> kIndexMagic{'R', 'R', 'D', 'B'};

}  // namespace

std::vector<geometry::PatchBox> object_patches(std::span<const ObjectInstance> objects, double nms_iou) {
  std::vector<geometry::BoundingBox> boxes;
  std::vector<geometry::Point2> centers;
  std::vector<double> confidences;
  boxes.reserve(objects.size());
  for (const auto& o : objects) {
    boxes.push_back(o.box);
    centers.push_back(geometry::center(o.box));
    confidences.push_back(o.confidence);
  }
  const auto adj = geometry::delaunay_adjacency(centers);
  const auto expanded = geometry::expand_receptive_field(boxes, confidences, adj);
  return geometry::nms(expanded, nms_iou);
}

std::string select_reference(std::span<const SceneRecord> candidates) {
  if (candidates.empty()) throw DataError("select_reference called with no candidates");
  const bool any_embedding = candidates.front().selection_embedding.has_value();
  for (const auto& c : candidates) {
    if (c.selection_embedding.has_value() != any_embedding) {
      throw DataError("image '" + c.image_id + "' is missing a selection embedding that other images of room '" +
                      c.room_id + "' carry");
    }
  }
  const std::size_t dim = candidates.front().selection_or_global().dim();
  std::vector<double> centroid(dim, 0.0);
  for (const auto& c : candidates) {
    const auto& e = c.selection_or_global();
    if (e.dim() != dim) throw DimensionMismatch("selection embedding of '" + c.image_id + "'", dim, e.dim());
    const auto v = e.values();
    for (std::size_t d = 0; d < dim; ++d) centroid[d] += v[d];
  }
  for (auto& x : centroid) x /= static_cast<double>(candidates.size());

  const SceneRecord* best = nullptr;
  double best_dist = std::numeric_limits<double>::infinity();
  for (const auto& c : candidates) {
    const auto v = c.selection_or_global().values();
    double dist = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
      const double diff = static_cast<double>(v[d]) - centroid[d];
      dist += diff * diff;
    }
    if (dist < best_dist || (dist == best_dist && c.image_id < best->image_id)) {
      best = &c;
      best_dist = dist;
    }
  }
  return best->image_id;
}

ReferenceDatabase build_database(std::span<const SceneRecord> records,
                                 const scoring::ScoringConfig& cfg,
                                 const ProviderBundle& providers) {
  cfg.validate();
  std::set<std::string> seen;
  std::map<std::string, std::vector<SceneRecord>> rooms;
  for (const auto& r : records) {
    r.validate();
    if (!seen.insert(r.image_id).second) throw DataError("duplicate image_id '" + r.image_id + "'");
    rooms[r.room_id].push_back(r);
  }
  io::infer_dims(records);

  ReferenceDatabase db;
  db.build_config = cfg;
  for (auto& [room, members] : rooms) {
    const std::string chosen = select_reference(members);
    SceneRecord ref = *std::find_if(members.begin(), members.end(),
                                    [&](const SceneRecord& r) { return r.image_id == chosen; });
    ref.objects = ref.objects_above(cfg.object_conf_threshold);
    const auto boxes = object_patches(ref.objects, cfg.nms_iou);
    std::vector<matching::FeatureVector> features;
    try {
      features = providers.patch_features(ref, ref.objects, boxes);
    } catch (const std::exception& e) {
      throw ProviderError("Object Feature Extractor", ref.image_id, e.what());
    }
    if (features.size() != boxes.size()) {
      throw ProviderError("Object Feature Extractor", ref.image_id, "returned " + std::to_string(features.size()) +
                                                                        " features for " +
                                                                        std::to_string(boxes.size()) + " patches");
    }
    std::vector<PatchEntry> entries;
    for (std::size_t i = 0; i < boxes.size(); ++i) entries.push_back({boxes[i], features[i]});
    db.patches.emplace(room, std::move(entries));
    db.refs.emplace(room, std::move(ref));
  }
  return db;
}

std::vector<std::uint8_t> serialize(const ReferenceDatabase& db) {
  std::vector<SceneRecord> refs;
  for (const auto& [_, r] : db.refs) refs.push_back(r);
  const io::RecordDims dims = io::infer_dims(refs);
  std::uint32_t patch_dim = 0;
  for (const auto& [room, entries] : db.patches) {
    if (!db.refs.contains(room)) throw InvariantError("patch features for unknown room '" + room + "'");
    for (const auto& e : entries) {
      if (patch_dim == 0) patch_dim = static_cast<std::uint32_t>(e.feature.dim());
      if (e.feature.dim() != patch_dim) throw DimensionMismatch("patch features of room '" + room + "'", patch_dim, e.feature.dim());
    }
  }

  io::ByteWriter w;
  io::begin_frame(w, kIndexMagic, db.format_version);
  w.str(config::canonical(db.build_config));
  w.u32(dims.global);
  w.u32(dims.selection);
  w.u32(dims.object);
  w.u32(dims.keypoint);
  w.u32(patch_dim);
  w.u64(db.refs.size());
  const std::size_t table_at = w.size();
  for (std::size_t i = 0; i < db.refs.size(); ++i) w.u64(0);

  std::size_t slot = 0;
  for (const auto& [room, ref] : db.refs) {
    w.patch_u64(table_at + 8 * slot++, w.size());
    w.str(room);
    io::write_record(w, ref, dims);
    const auto it = db.patches.find(room);
    const std::size_t n = it == db.patches.end() ? 0 : it->second.size();
    w.u32(static_cast<std::uint32_t>(n));
    for (std::size_t i = 0; i < n; ++i) {
      const auto& e = it->second[i];
      w.f64(e.patch.box.x());
      w.f64(e.patch.box.y());
      w.f64(e.patch.box.w());
      w.f64(e.patch.box.h());
      w.u64(e.patch.seed_index);
      w.f64(e.patch.confidence);
      w.floats(e.feature.values());
    }
  }
  io::finish_frame(w);
  return std::move(w.bytes());
}

ReferenceDatabase deserialize(std::span<const std::uint8_t> bytes, const std::string& context) {
  io::ByteReader r(io::open_frame(bytes, kIndexMagic, kIndexVersion, context), context);
  ReferenceDatabase db;
  try {
    db.build_config = config::from_json(nlohmann::json::parse(r.str()));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(context + ": config snapshot is not valid JSON: " + e.what());
  }
  io::RecordDims dims;
  dims.global = r.u32();
  dims.selection = r.u32();
  dims.object = r.u32();
  dims.keypoint = r.u32();
  const std::uint32_t patch_dim = r.u32();
  const std::uint64_t rooms = r.u64();
  if (rooms > r.remaining() / 8) throw TruncatedFile(context + ": room offset table is short");
  std::vector<std::uint64_t> offsets(rooms);
  for (auto& off : offsets) off = r.u64();
  for (auto off : offsets) {
    if (off < io::kHeaderSize || off - io::kHeaderSize != r.pos()) {
      throw FormatError(context + ": room offset table disagrees with section layout");
    }
    auto room = r.str();
    auto ref = io::read_record(r, dims);
    if (ref.room_id != room) throw FormatError(context + ": section for room '" + room + "' holds another room");
    const std::uint32_t n = r.u32();
    std::vector<PatchEntry> entries;
    for (std::uint32_t i = 0; i < n; ++i) {
      const double x = r.f64(), y = r.f64(), w = r.f64(), h = r.f64();
      const std::uint64_t seed = r.u64();
      const double conf = r.f64();
      entries.push_back({{geometry::BoundingBox(x, y, w, h), static_cast<std::size_t>(seed), conf},
                         matching::FeatureVector(r.floats(patch_dim))});
    }
    db.patches.emplace(room, std::move(entries));
    if (!db.refs.emplace(room, std::move(ref)).second) throw FormatError(context + ": room '" + room + "' appears twice");
  }
  if (r.remaining() != 0) throw FormatError(context + ": bytes left after the last room");
  return db;
}

void save_database(const ReferenceDatabase& db, const std::filesystem::path& path) {
  io::write_file(path, serialize(db));
}

ReferenceDatabase load_database(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw NotFoundError("index not found: '" + path.string() + "'");
  return deserialize(io::read_file(path), path.string());
}

}  // namespace roomreid::database
