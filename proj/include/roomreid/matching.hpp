// Copyright 2026 The roomreid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace roomreid::matching {

/// Dense feature vector stored in single precision with its Euclidean norm cached in double.
/// Construction rejects empty, non-finite, and all-zero vectors.
class FeatureVector {
 public:
  explicit FeatureVector(std::vector<float> values);

  std::size_t dim() const noexcept { return values_.size(); }
  std::span<const float> values() const noexcept { return values_; }
  double norm() const noexcept { return norm_; }

  friend bool operator==(const FeatureVector& a, const FeatureVector& b) { return a.values_ == b.values_; }

 private:
  std::vector<float> values_;
  double norm_;
};

/// Row-major M x N matrix of cosine similarities.
class SimilarityMatrix {
 public:
  SimilarityMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
};

struct MnnPair {
  std::size_t query_index;
  std::size_t reference_index;
  double score;
  friend bool operator==(const MnnPair&, const MnnPair&) = default;
};

/// Mutual nearest neighbour matches, ordered by query index.
struct MnnMatchSet {
  std::vector<MnnPair> pairs;

  std::vector<double> scores() const;
  std::size_t size() const noexcept { return pairs.size(); }
  bool empty() const noexcept { return pairs.empty(); }
};

/// a.b / (|a| |b|) in double precision. Throws DimensionMismatch on unequal dimensions.
double cosine(const FeatureVector& a, const FeatureVector& b);

SimilarityMatrix similarity_matrix(std::span<const FeatureVector> queries, std::span<const FeatureVector> refs);

/// Indices of the min(k, size) largest scores, descending; equal scores keep ascending index order.
std::vector<std::size_t> top_k(std::span<const double> scores, std::size_t k);

/// Pairs (i, j) where j is the best reference for query i and i is the best query for reference j.
/// Argmax ties resolve to the lowest index on both sides. Either side empty gives an empty set.
MnnMatchSet mutual_nearest_neighbors(std::span<const FeatureVector> qs, std::span<const FeatureVector> rs);

}  // namespace roomreid::matching
