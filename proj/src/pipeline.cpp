// Copyright 2026 The roomreid Authors
// SPDX-License-Identifier: Apache-2.0

#include "roomreid/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <thread>

#include "roomreid/error.hpp"

namespace roomreid::pipeline {

namespace {

using Clock = std::chrono::steady_clock;

class StageTimer {
 public:
  StageTimer() {
    for (auto label : kStageLabels) timings_.emplace_back(std::string(label), 0);
  }

  template <typename Fn>
  decltype(auto) run(std::size_t stage, Fn&& fn) {
    const auto start = Clock::now();
    struct Record {
      StageTimer* self;
      std::size_t stage;
      Clock::time_point start;
      ~Record() {
        self->timings_[stage].second +=
            std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - start).count();
      }
    } record{this, stage, start};
    return fn();
  }

  std::vector<std::pair<std::string, std::int64_t>> take() { return std::move(timings_); }

 private:
  std::vector<std::pair<std::string, std::int64_t>> timings_;
};

enum Stage : std::size_t {
  kGlobalFeature = 0,
  kGlobalRetrieval,
  kSegmentation,
  kExpander,
  kObjectFeature,
  kScoring,
  kFineGrained,
};

std::vector<matching::FeatureVector> features_of(std::span<const ObjectInstance> objects) {
  std::vector<matching::FeatureVector> out;
  out.reserve(objects.size());
  for (const auto& o : objects) out.push_back(o.feature);
  return out;
}

// Provider exceptions are reported against the stage that invoked them.
template <typename Fn>
auto call_provider(std::string_view stage, const std::string& image_id, Fn&& fn) {
  try {
    return fn();
  } catch (const ProviderError&) {
    throw;
  } catch (const std::exception& e) {
    throw ProviderError(std::string(stage), image_id, e.what());
  }
}

}  // namespace

bool RetrievalResult::same_outcome(const RetrievalResult& other) const {
  return query_image_id == other.query_image_id && stage1 == other.stage1 && stage2 == other.stage2 &&
         final_room_id == other.final_room_id && fine_match_counts == other.fine_match_counts;
}

RetrievalResult query(const SceneRecord& q,
                      const database::ReferenceDatabase& db,
                      const scoring::ScoringConfig& cfg,
                      const ProviderBundle& providers) {
  cfg.validate();
  if (db.refs.empty()) throw DataError("reference database is empty");
  StageTimer timer;
  RetrievalResult result;
  result.query_image_id = q.image_id;

  // Features arrive precomputed; this stage only checks they fit the database.
  std::vector<const SceneRecord*> refs;
  timer.run(kGlobalFeature, [&] {
    q.validate();
    const std::size_t dim = db.refs.begin()->second.global_feature.dim();
    if (q.global_feature.dim() != dim) {
      throw DimensionMismatch("global feature of query '" + q.image_id + "' vs database", dim, q.global_feature.dim());
    }
    refs.reserve(db.refs.size());
    for (const auto& [_, r] : db.refs) refs.push_back(&r);
  });

  timer.run(kGlobalRetrieval, [&] {
    std::vector<double> scores;
    scores.reserve(refs.size());
    for (const auto* r : refs) scores.push_back(matching::cosine(q.global_feature, r->global_feature));
    for (std::size_t idx : matching::top_k(scores, cfg.stage1_k)) {
      result.stage1.push_back({refs[idx]->room_id, scores[idx]});
    }
  });

  const auto query_objects =
      timer.run(kSegmentation, [&] { return q.objects_above(cfg.object_conf_threshold); });

  std::vector<geometry::PatchBox> query_patch_boxes;
  std::vector<matching::FeatureVector> query_patches;
  if (cfg.use_patch) {
    query_patch_boxes = timer.run(kExpander, [&] { return database::object_patches(query_objects, cfg.nms_iou); });
    query_patches = timer.run(kObjectFeature, [&] {
      auto f = call_provider(kStageLabels[kObjectFeature], q.image_id,
                             [&] { return providers.patch_features(q, query_objects, query_patch_boxes); });
      if (f.size() != query_patch_boxes.size()) {
        throw ProviderError(std::string(kStageLabels[kObjectFeature]), q.image_id,
                            "returned " + std::to_string(f.size()) + " features for " +
                                std::to_string(query_patch_boxes.size()) + " patches");
      }
      return f;
    });
  }

  timer.run(kScoring, [&] {
    const auto q_objects = features_of(query_objects);
    std::vector<scoring::RankedCandidate> candidates;
    for (std::size_t rank = 0; rank < result.stage1.size(); ++rank) {
      const auto& room = result.stage1[rank].room_id;
      const auto& ref = db.refs.at(room);
      const auto r_objects = features_of(ref.objects_above(cfg.object_conf_threshold));
      std::vector<matching::FeatureVector> r_patches;
      if (const auto it = db.patches.find(room); it != db.patches.end()) {
        for (const auto& e : it->second) r_patches.push_back(e.feature);
      }
      candidates.push_back({room, rank,
                            scoring::object_aware_score(result.stage1[rank].s_global, query_patches, r_patches,
                                                        q_objects, r_objects, cfg)});
    }
    for (auto& c : scoring::refine_candidates(std::move(candidates), cfg.stage2_k)) {
      result.stage2.push_back({std::move(c.candidate_id), c.breakdown});
    }
  });

  timer.run(kFineGrained, [&] {
    result.final_room_id = result.stage2.front().room_id;
    if (!cfg.use_fine_grained) return;
    std::size_t best = 0;
    bool first = true;
    for (const auto& entry : result.stage2) {
      const auto& ref = db.refs.at(entry.room_id);
      const std::size_t count = call_provider(kStageLabels[kFineGrained], q.image_id,
                                              [&] { return providers.match_count(q, ref); });
      result.fine_match_counts[entry.room_id] = count;
      // Strictly more matches wins; equal counts keep the stage-2 order.
      if (first || count > best) {
        best = count;
        result.final_room_id = entry.room_id;
        first = false;
      }
    }
  });

  result.timings = timer.take();
  return result;
}

std::vector<BatchItem> query_batch(std::span<const SceneRecord> queries,
                                   const database::ReferenceDatabase& db,
                                   const scoring::ScoringConfig& cfg,
                                   const ProviderBundle& providers,
                                   std::size_t workers) {
  std::vector<BatchItem> out(queries.size(), std::string{});
  auto run_one = [&](std::size_t i) {
    try {
      out[i] = query(queries[i], db, cfg, providers);
    } catch (const std::exception& e) {
      out[i] = std::string(e.what());
    }
  };
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(queries.size(), 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < queries.size(); ++i) run_one(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < queries.size(); i = next++) run_one(i);
    });
  }
  pool.clear();
  return out;
}

nlohmann::ordered_json trace_record(const RetrievalResult& r) {
  nlohmann::ordered_json j;
  j["schema"] = kTraceSchema;
  j["query_image_id"] = r.query_image_id;
  j["stage1"] = nlohmann::ordered_json::array();
  for (const auto& e : r.stage1) j["stage1"].push_back({{"room_id", e.room_id}, {"s_global", e.s_global}});
  j["stage2"] = nlohmann::ordered_json::array();
  for (const auto& e : r.stage2) {
    j["stage2"].push_back({{"room_id", e.room_id},
                           {"s_global", e.breakdown.s_global},
                           {"s_patch", e.breakdown.s_patch},
                           {"s_object", e.breakdown.s_object},
                           {"total", e.breakdown.total}});
  }
  j["final_room_id"] = r.final_room_id;
  j["fine_match_counts"] = nlohmann::ordered_json::object();
  for (const auto& [room, n] : r.fine_match_counts) j["fine_match_counts"][room] = n;
  j["timings_us"] = nlohmann::ordered_json::object();
  for (const auto& [label, us] : r.timings) j["timings_us"][label] = us;
  return j;
}

nlohmann::ordered_json trace_error(const std::string& query_image_id, const std::string& message) {
  nlohmann::ordered_json j;
  j["schema"] = kTraceSchema;
  j["query_image_id"] = query_image_id;
  j["error"] = message;
  return j;
}

RetrievalResult parse_trace(const nlohmann::ordered_json& j) {
  try {
    if (j.at("schema").get<std::string>() != kTraceSchema) throw DataError("unsupported trace schema");
    if (j.contains("error")) throw DataError("trace records an error: " + j.at("error").get<std::string>());
    RetrievalResult r;
    r.query_image_id = j.at("query_image_id").get<std::string>();
    for (const auto& e : j.at("stage1")) r.stage1.push_back({e.at("room_id"), e.at("s_global")});
    for (const auto& e : j.at("stage2")) {
      r.stage2.push_back({e.at("room_id"), {e.at("s_global"), e.at("s_patch"), e.at("s_object"), e.at("total")}});
    }
    r.final_room_id = j.at("final_room_id").get<std::string>();
    for (const auto& [room, n] : j.at("fine_match_counts").items()) r.fine_match_counts[room] = n.get<std::size_t>();
    for (const auto& [label, us] : j.at("timings_us").items()) r.timings.emplace_back(label, us.get<std::int64_t>());
    return r;
  } catch (const nlohmann::ordered_json::exception& e) {
    throw DataError(std::string("malformed trace record: ") + e.what());
  }
}

}  // namespace roomreid::pipeline
