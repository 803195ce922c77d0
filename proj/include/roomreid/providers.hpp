// Copyright 2026 The roomreid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "roomreid/geometry.hpp"
#include "roomreid/matching.hpp"
#include "roomreid/records.hpp"

namespace roomreid {

/// Supplies one feature per object patch. `objects` is the thresholded detection list the
/// patches were built from; PatchBox::seed_index indexes into it.
class PatchFeatureProvider {
 public:
  virtual ~PatchFeatureProvider() = default;
  virtual std::vector<matching::FeatureVector> patch_features(const SceneRecord& image,
                                                              std::span<const ObjectInstance> objects,
                                                              std::span<const geometry::PatchBox> patches) = 0;
  /// False makes the engine serialise every call to this provider.
  virtual bool concurrency_safe() const { return true; }
};

/// Counts keypoint correspondences between a query and a candidate reference.
class FineMatcher {
 public:
  virtual ~FineMatcher() = default;
  virtual std::size_t match_count(const SceneRecord& query, const SceneRecord& reference) = 0;
  virtual bool concurrency_safe() const { return true; }
};

/// Pools object appearance into patch features: the mean of the unit-normalised features of
/// every object whose box center falls inside the patch box (edges inclusive), rounded to f32.
/// Stands in for running an image backbone over the patch crop.
class ObjectPoolingPatchProvider final : public PatchFeatureProvider {
 public:
  std::vector<matching::FeatureVector> patch_features(const SceneRecord& image,
                                                      std::span<const ObjectInstance> objects,
                                                      std::span<const geometry::PatchBox> patches) override;
};

/// Cosine threshold below which a keypoint MNN pair is not counted.
inline constexpr double kFineMatchMinCosine = 0.9;

/// Number of mutual nearest neighbour keypoint pairs with cosine >= 0.9. Empty side gives 0.
std::size_t builtin_fine_matcher(const SceneRecord& query, const SceneRecord& reference);

class MnnFineMatcher final : public FineMatcher {
 public:
  std::size_t match_count(const SceneRecord& query, const SceneRecord& reference) override {
    return builtin_fine_matcher(query, reference);
  }
};

inline constexpr std::string_view kMatchCountHeader = "# roomreid-match-counts v1";

/// Precomputed (query image, reference image) -> count table, e.g. from an offline deep matcher.
///
/// Text format: the kMatchCountHeader line, then one tab-separated entry per line:
///   <query_image_id>\t<reference_image_id>\t<count>
/// Blank lines and further '#' lines are ignored.
class MatchCountTable final : public FineMatcher {
 public:
  MatchCountTable() = default;
  explicit MatchCountTable(std::map<std::pair<std::string, std::string>, std::size_t> counts)
      : counts_(std::move(counts)) {}

  static MatchCountTable load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  /// Throws NotFoundError when the pair is absent from the table.
  std::size_t match_count(const SceneRecord& query, const SceneRecord& reference) override;
  std::size_t size() const noexcept { return counts_.size(); }

 private:
  std::map<std::pair<std::string, std::string>, std::size_t> counts_;
};

/// The pluggable pieces of the cascade. Calls into providers that are not concurrency-safe
/// are serialised.
class ProviderBundle {
 public:
  ProviderBundle(std::shared_ptr<PatchFeatureProvider> patch, std::shared_ptr<FineMatcher> fine);

  /// Object-pooling patches and the MNN keypoint matcher.
  static ProviderBundle builtin();

  std::vector<matching::FeatureVector> patch_features(const SceneRecord& image,
                                                      std::span<const ObjectInstance> objects,
                                                      std::span<const geometry::PatchBox> patches) const;
  std::size_t match_count(const SceneRecord& query, const SceneRecord& reference) const;

 private:
  std::shared_ptr<PatchFeatureProvider> patch_;
  std::shared_ptr<FineMatcher> fine_;
  std::shared_ptr<std::mutex> patch_mutex_;
  std::shared_ptr<std::mutex> fine_mutex_;
};

}  // namespace roomreid
