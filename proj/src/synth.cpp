// Copyright 2026 The roomreid Authors
// SPDX-License-Identifier: Apache-2.0

#include "roomreid/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "roomreid/error.hpp"

namespace roomreid::synth {

namespace {

constexpr double kFrameW = 640.0;
constexpr double kFrameH = 480.0;
// Weight of the room-level offset in the global feature, relative to the object mean.
constexpr double kRoomOffsetWeight = 0.5;

using Vec = std::vector<double>;

class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double normal() { return normal_(rng_); }
  std::size_t integer(Range r) { return std::uniform_int_distribution<std::size_t>(r.lo, r.hi)(rng_); }
  bool keep(double dropout) { return uniform(0.0, 1.0) >= dropout; }

  Vec unit(std::size_t dim) {
    Vec v(dim);
    for (auto& x : v) x = normal();
    return normalized(v);
  }

  static Vec normalized(Vec v) {
    double sq = 0.0;
    for (double x : v) sq += x * x;
    const double n = std::sqrt(sq);
    if (n > 0.0) {
      for (auto& x : v) x /= n;
    }
    return v;
  }

  // prototype + sigma * N(0, I/dim): the noise has expected norm sigma.
  Vec perturb(const Vec& proto, double sigma) {
    Vec out = proto;
    const double scale = sigma / std::sqrt(static_cast<double>(proto.size()));
    for (auto& x : out) x += scale * normal();
    return out;
  }

 private:
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

Vec mix(const Vec& shared, const Vec& own, double weight) {
  Vec out(shared.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = weight * shared[i] + (1.0 - weight) * own[i];
  return Sampler::normalized(out);
}

// Non-zero guaranteed: an all-zero draw has probability zero but would be rejected downstream.
matching::FeatureVector to_feature(const Vec& v) {
  std::vector<float> f(v.size());
  bool nonzero = false;
  for (std::size_t i = 0; i < v.size(); ++i) {
    f[i] = static_cast<float>(v[i]);
    nonzero = nonzero || f[i] != 0.0f;
  }
  if (!nonzero) f[0] = 1.0f;
  return matching::FeatureVector(std::move(f));
}

double f32(double v) { return static_cast<double>(static_cast<float>(v)); }

struct RoomObject {
  Vec prototype;
  double x, y, w, h;
  double confidence;
};

struct Room {
  std::string id;
  Vec offset;
  std::vector<RoomObject> objects;
  std::vector<Vec> keypoints;
};

std::string room_name(std::size_t r) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "room%03zu", r);
  return buf;
}

SceneRecord render_view(const Room& room, const SynthSpec& spec, Sampler& s, std::string image_id, Split split) {
  const double sigma = spec.viewpoint_noise;
  std::vector<ObjectInstance> objects;
  Vec mean(spec.feature_dim, 0.0);
  std::size_t survivors = 0;
  for (const auto& o : room.objects) {
    const bool kept = s.keep(spec.dropout);
    // Noise is drawn for every object, dropped or not.
    const double dx = 20.0 * sigma * s.normal(), dy = 20.0 * sigma * s.normal();
    const double dc = 0.1 * sigma * s.normal();
    auto feature = s.perturb(o.prototype, sigma);
    if (!kept) continue;
    const double w = f32(o.w), h = f32(o.h);
    const double x = f32(std::clamp(o.x + dx, 0.0, kFrameW - w));
    const double y = f32(std::clamp(o.y + dy, 0.0, kFrameH - h));
    const double conf = f32(std::clamp(o.confidence + dc, 0.05, 1.0));
    objects.push_back({geometry::BoundingBox(x, y, w, h), conf, to_feature(feature)});
    for (std::size_t d = 0; d < mean.size(); ++d) mean[d] += o.prototype[d];
    ++survivors;
  }
  Vec global_base = Sampler::normalized(mean);
  for (std::size_t d = 0; d < global_base.size(); ++d) global_base[d] += kRoomOffsetWeight * room.offset[d];
  const auto global = s.perturb(global_base, sigma);
  const auto selection = s.perturb(global_base, sigma);

  std::vector<matching::FeatureVector> keypoints;
  for (const auto& k : room.keypoints) {
    const bool kept = s.keep(spec.dropout);
    auto desc = s.perturb(k, sigma * spec.keypoint_noise_ratio);
    if (kept) keypoints.push_back(to_feature(desc));
  }
  return SceneRecord{std::move(image_id), room.id,       split, to_feature(global), std::move(objects),
                     std::move(keypoints), to_feature(selection)};
}

}  // namespace

void SynthSpec::validate() const {
  if (n_rooms == 0) throw DataError("synth: n_rooms must be >= 1");
  if (objects_per_room.lo > objects_per_room.hi) throw DataError("synth: objects_per_room range is empty");
  if (keypoints_per_image.lo > keypoints_per_image.hi) throw DataError("synth: keypoints_per_image range is empty");
  if (feature_dim == 0) throw DataError("synth: feature_dim must be >= 1");
  if (!(viewpoint_noise >= 0.0) || !std::isfinite(viewpoint_noise)) throw DataError("synth: noise must be >= 0");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw DataError("synth: dropout must lie in [0, 1)");
  if (!(distractor_similarity >= 0.0 && distractor_similarity < 1.0)) {
    throw DataError("synth: distractor_similarity must lie in [0, 1)");
  }
  if (reference_pool_views == 0) throw DataError("synth: reference_pool_views must be >= 1");
  if (!(keypoint_noise_ratio >= 0.0) || !std::isfinite(keypoint_noise_ratio)) {
    throw DataError("synth: keypoint_noise_ratio must be a finite nonnegative number");
  }
}

nlohmann::json to_json(const SynthSpec& spec) {
  return nlohmann::json{
      {"n_rooms", spec.n_rooms},
      {"objects_per_room", {spec.objects_per_room.lo, spec.objects_per_room.hi}},
      {"feature_dim", spec.feature_dim},
      {"keypoints_per_image", {spec.keypoints_per_image.lo, spec.keypoints_per_image.hi}},
      {"viewpoint_noise", spec.viewpoint_noise},
      {"dropout", spec.dropout},
      {"distractor_similarity", spec.distractor_similarity},
      {"reference_pool_views", spec.reference_pool_views},
      {"keypoint_noise_ratio", spec.keypoint_noise_ratio},
      {"rng_seed", spec.rng_seed},
  };
}

SynthSpec spec_from_json(const nlohmann::json& j, SynthSpec base) {
  try {
    auto range = [](const nlohmann::json& v) { return Range{v.at(0).get<std::size_t>(), v.at(1).get<std::size_t>()}; };
    for (const auto& [key, v] : j.items()) {
      if (key == "n_rooms") base.n_rooms = v.get<std::size_t>();
      else if (key == "objects_per_room") base.objects_per_room = range(v);
      else if (key == "feature_dim") base.feature_dim = v.get<std::size_t>();
      else if (key == "keypoints_per_image") base.keypoints_per_image = range(v);
      else if (key == "viewpoint_noise") base.viewpoint_noise = v.get<double>();
      else if (key == "dropout") base.dropout = v.get<double>();
      else if (key == "distractor_similarity") base.distractor_similarity = v.get<double>();
      else if (key == "reference_pool_views") base.reference_pool_views = v.get<std::size_t>();
      else if (key == "keypoint_noise_ratio") base.keypoint_noise_ratio = v.get<double>();
      else if (key == "rng_seed") base.rng_seed = v.get<std::uint64_t>();
      else throw DataError("unknown synth spec key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed synth spec: ") + e.what());
  }
  base.validate();
  return base;
}

Generated generate(const SynthSpec& spec, std::size_t views_per_room) {
  spec.validate();
  Sampler s(spec.rng_seed);
  const Vec shared = s.unit(spec.feature_dim);

  std::vector<Room> rooms;
  for (std::size_t r = 0; r < spec.n_rooms; ++r) {
    Room room;
    room.id = room_name(r);
    room.offset = mix(shared, s.unit(spec.feature_dim), spec.distractor_similarity);
    const std::size_t n_objects = s.integer(spec.objects_per_room);
    for (std::size_t i = 0; i < n_objects; ++i) {
      RoomObject o;
      o.prototype = mix(shared, s.unit(spec.feature_dim), spec.distractor_similarity);
      o.w = std::round(s.uniform(40.0, 160.0));
      o.h = std::round(s.uniform(40.0, 160.0));
      o.x = s.uniform(0.0, kFrameW - o.w);
      o.y = s.uniform(0.0, kFrameH - o.h);
      o.confidence = s.uniform(0.3, 1.0);
      room.objects.push_back(std::move(o));
    }
    const std::size_t n_keypoints = s.integer(spec.keypoints_per_image);
    for (std::size_t k = 0; k < n_keypoints; ++k) room.keypoints.push_back(s.unit(spec.feature_dim));
    rooms.push_back(std::move(room));
  }

  Generated out;
  out.dataset.name = "synthetic-seed" + std::to_string(spec.rng_seed);
  for (const auto& room : rooms) {
    for (std::size_t v = 0; v < spec.reference_pool_views; ++v) {
      auto rec = render_view(room, spec, s, room.id + "_ref" + std::to_string(v), Split::kReferencePool);
      out.truth[rec.image_id] = room.id;
      out.dataset.records.push_back(std::move(rec));
    }
    for (std::size_t v = 0; v < views_per_room; ++v) {
      auto rec = render_view(room, spec, s, room.id + "_view" + std::to_string(v), Split::kQuery);
      out.truth[rec.image_id] = room.id;
      out.dataset.records.push_back(std::move(rec));
    }
  }
  return out;
}

}  // namespace roomreid::synth
