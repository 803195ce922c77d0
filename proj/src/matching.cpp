// Copyright 2026 The roomreid Authors
// SPDX-License-Identifier: Apache-2.0

#include "roomreid/matching.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "roomreid/error.hpp"

namespace roomreid::matching {

FeatureVector::FeatureVector(std::vector<float> values) : values_(std::move(values)), norm_(0.0) {
  if (values_.empty()) throw DataError("feature vector must have dimension > 0");
  double sq = 0.0;
  for (float v : values_) {
    if (!std::isfinite(v)) throw DataError("feature vector has a non-finite entry");
    sq += static_cast<double>(v) * static_cast<double>(v);
  }
  norm_ = std::sqrt(sq);
  if (norm_ == 0.0) throw DataError("feature vector is all zeros; cosine similarity is undefined");
}

std::vector<double> MnnMatchSet::scores() const {
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(p.score);
  return out;
}

double cosine(const FeatureVector& a, const FeatureVector& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("cosine", a.dim(), b.dim());
  const auto av = a.values();
  const auto bv = b.values();
  double acc = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) acc += static_cast<double>(av[i]) * static_cast<double>(bv[i]);
  return std::clamp(acc / (a.norm() * b.norm()), -1.0, 1.0);
}

SimilarityMatrix similarity_matrix(std::span<const FeatureVector> queries, std::span<const FeatureVector> refs) {
  SimilarityMatrix s(queries.size(), refs.size());
  for (std::size_t i = 0; i < queries.size(); ++i) {
    for (std::size_t j = 0; j < refs.size(); ++j) s(i, j) = cosine(queries[i], refs[j]);
  }
  return s;
}

std::vector<std::size_t> top_k(std::span<const double> scores, std::size_t k) {
  if (scores.empty()) throw DataError("top_k over an empty score row");
  if (k == 0) throw DataError("top_k requires k >= 1");
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  const std::size_t take = std::min(k, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take), idx.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return a < b;
                    });
  idx.resize(take);
  return idx;
}

MnnMatchSet mutual_nearest_neighbors(std::span<const FeatureVector> qs, std::span<const FeatureVector> rs) {
  MnnMatchSet out;
  if (qs.empty() || rs.empty()) return out;
  const auto s = similarity_matrix(qs, rs);

  std::vector<std::size_t> best_ref(qs.size(), 0);
  std::vector<std::size_t> best_query(rs.size(), 0);
  for (std::size_t i = 0; i < qs.size(); ++i) {
    for (std::size_t j = 1; j < rs.size(); ++j) {
      if (s(i, j) > s(i, best_ref[i])) best_ref[i] = j;
    }
  }
  for (std::size_t j = 0; j < rs.size(); ++j) {
    for (std::size_t i = 1; i < qs.size(); ++i) {
      if (s(i, j) > s(best_query[j], j)) best_query[j] = i;
    }
  }
  for (std::size_t i = 0; i < qs.size(); ++i) {
    const std::size_t j = best_ref[i];
    if (best_query[j] == i) out.pairs.push_back({i, j, s(i, j)});
  }
  return out;
}

}  // namespace roomreid::matching
