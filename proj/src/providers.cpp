// Copyright 2026 The roomreid Authors
// SPDX-License-Identifier: Apache-2.0

#include "roomreid/providers.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "roomreid/error.hpp"

namespace roomreid {

std::vector<matching::FeatureVector> ObjectPoolingPatchProvider::patch_features(
    const SceneRecord& image, std::span<const ObjectInstance> objects, std::span<const geometry::PatchBox> patches) {
  std::vector<matching::FeatureVector> out;
  out.reserve(patches.size());
  for (const auto& patch : patches) {
    if (patch.seed_index >= objects.size()) {
      throw DataError("patch seed index out of range for image '" + image.image_id + "'");
    }
    const std::size_t dim = objects[patch.seed_index].feature.dim();
    std::vector<double> acc(dim, 0.0);
    std::size_t members = 0;
    for (const auto& o : objects) {
      const auto c = geometry::center(o.box);
      const auto& b = patch.box;
      if (c.px < b.x() || c.px > b.right() || c.py < b.y() || c.py > b.bottom()) continue;
      const auto v = o.feature.values();
      for (std::size_t d = 0; d < dim; ++d) acc[d] += static_cast<double>(v[d]) / o.feature.norm();
      ++members;
    }
    std::vector<float> pooled(dim);
    bool nonzero = false;
    for (std::size_t d = 0; d < dim; ++d) {
      pooled[d] = static_cast<float>(acc[d] / static_cast<double>(members));
      nonzero = nonzero || pooled[d] != 0.0f;
    }
    if (members == 0 || !nonzero) {
      const auto seed = objects[patch.seed_index].feature.values();
      pooled.assign(seed.begin(), seed.end());
    }
    out.emplace_back(std::move(pooled));
  }
  return out;
}

std::size_t builtin_fine_matcher(const SceneRecord& query, const SceneRecord& reference) {
  const auto matches = matching::mutual_nearest_neighbors(query.keypoint_descriptors, reference.keypoint_descriptors);
  std::size_t count = 0;
  for (const auto& p : matches.pairs) {
    if (p.score >= kFineMatchMinCosine) ++count;
  }
  return count;
}

MatchCountTable MatchCountTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("match count table not found: '" + path.string() + "'");
  std::map<std::pair<std::string, std::string>, std::size_t> counts;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!header_seen) {
      if (line != kMatchCountHeader) {
        throw FormatError(path.string() + ": first line must be '" + std::string(kMatchCountHeader) + "'");
      }
      header_seen = true;
      continue;
    }
    if (line.empty() || line.front() == '#') continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
    if (t2 == std::string::npos || line.find('\t', t2 + 1) != std::string::npos) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": expected three tab-separated fields");
    }
    std::size_t count = 0;
    const char* first = line.data() + t2 + 1;
    const char* last = line.data() + line.size();
    const auto [ptr, ec] = std::from_chars(first, last, count);
    if (ec != std::errc() || ptr != last || first == last) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": count is not a nonnegative integer");
    }
    auto key = std::make_pair(line.substr(0, t1), line.substr(t1 + 1, t2 - t1 - 1));
    if (!counts.emplace(std::move(key), count).second) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": duplicate image pair");
    }
  }
  if (!header_seen) throw FormatError(path.string() + ": empty match count table");
  return MatchCountTable(std::move(counts));
}

void MatchCountTable::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << kMatchCountHeader << '\n';
  for (const auto& [key, count] : counts_) out << key.first << '\t' << key.second << '\t' << count << '\n';
}

std::size_t MatchCountTable::match_count(const SceneRecord& query, const SceneRecord& reference) {
  const auto it = counts_.find({query.image_id, reference.image_id});
  if (it == counts_.end()) {
    throw NotFoundError("no match count for query '" + query.image_id + "' against '" + reference.image_id + "'");
  }
  return it->second;
}

ProviderBundle::ProviderBundle(std::shared_ptr<PatchFeatureProvider> patch, std::shared_ptr<FineMatcher> fine)
    : patch_(std::move(patch)),
      fine_(std::move(fine)),
      patch_mutex_(std::make_shared<std::mutex>()),
      fine_mutex_(std::make_shared<std::mutex>()) {
  if (!patch_ || !fine_) throw std::invalid_argument("provider bundle requires both providers");
}

ProviderBundle ProviderBundle::builtin() {
  return {std::make_shared<ObjectPoolingPatchProvider>(), std::make_shared<MnnFineMatcher>()};
}

std::vector<matching::FeatureVector> ProviderBundle::patch_features(const SceneRecord& image,
                                                                    std::span<const ObjectInstance> objects,
                                                                    std::span<const geometry::PatchBox> patches) const {
  if (patch_->concurrency_safe()) return patch_->patch_features(image, objects, patches);
  std::lock_guard lock(*patch_mutex_);
  return patch_->patch_features(image, objects, patches);
}

std::size_t ProviderBundle::match_count(const SceneRecord& query, const SceneRecord& reference) const {
  if (fine_->concurrency_safe()) return fine_->match_count(query, reference);
  std::lock_guard lock(*fine_mutex_);
  return fine_->match_count(query, reference);
}

}  // namespace roomreid
