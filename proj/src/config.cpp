// Copyright 2026 The roomreid Authors
// SPDX-License-Identifier: Apache-2.0

#include "roomreid/config.hpp"

#include <fstream>
#include <set>

#include "roomreid/error.hpp"

namespace roomreid::config {

using nlohmann::json;

json to_json(const scoring::ScoringConfig& cfg) {
  return json{
      {"patch_strategy", std::string(scoring::to_string(cfg.patch_strategy))},
      {"object_strategy", std::string(scoring::to_string(cfg.object_strategy))},
      {"use_global", cfg.use_global},
      {"use_patch", cfg.use_patch},
      {"use_object", cfg.use_object},
      {"use_fine_grained", cfg.use_fine_grained},
      {"stage1_k", cfg.stage1_k},
      {"stage2_k", cfg.stage2_k},
      {"nms_iou", cfg.nms_iou},
      {"object_conf_threshold", cfg.object_conf_threshold},
  };
}

scoring::ScoringConfig from_json(const json& j, scoring::ScoringConfig base) {
  if (!j.is_object()) throw DataError("scoring config must be a JSON object");
  static const std::set<std::string> known{"patch_strategy", "object_strategy", "use_global",
                                           "use_patch",      "use_object",      "use_fine_grained",
                                           "stage1_k",       "stage2_k",        "nms_iou",
                                           "object_conf_threshold"};
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) throw DataError("unknown scoring config key '" + key + "'");
  }
  try {
    if (j.contains("patch_strategy")) base.patch_strategy = scoring::parse_strategy(j.at("patch_strategy").get<std::string>());
    if (j.contains("object_strategy")) base.object_strategy = scoring::parse_strategy(j.at("object_strategy").get<std::string>());
    if (j.contains("use_global")) base.use_global = j.at("use_global").get<bool>();
    if (j.contains("use_patch")) base.use_patch = j.at("use_patch").get<bool>();
    if (j.contains("use_object")) base.use_object = j.at("use_object").get<bool>();
    if (j.contains("use_fine_grained")) base.use_fine_grained = j.at("use_fine_grained").get<bool>();
    if (j.contains("stage1_k")) base.stage1_k = j.at("stage1_k").get<std::size_t>();
    if (j.contains("stage2_k")) base.stage2_k = j.at("stage2_k").get<std::size_t>();
    if (j.contains("nms_iou")) base.nms_iou = j.at("nms_iou").get<double>();
    if (j.contains("object_conf_threshold")) base.object_conf_threshold = j.at("object_conf_threshold").get<double>();
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed scoring config: ") + e.what());
  }
  base.validate();
  return base;
}

scoring::ScoringConfig load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("config not found: '" + path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return from_json(j);
}

std::string canonical(const scoring::ScoringConfig& cfg) { return to_json(cfg).dump(); }

}  // namespace roomreid::config
