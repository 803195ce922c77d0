// Copyright 2026 The roomreid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace roomreid::geometry {

/// Axis-aligned pixel box: (x, y) is the top-left corner, w and h are strictly positive.
class BoundingBox {
 public:
  /// Throws DataError when w or h is not positive or any coordinate is non-finite.
  BoundingBox(double x, double y, double w, double h);

  double x() const noexcept { return x_; }
  double y() const noexcept { return y_; }
  double w() const noexcept { return w_; }
  double h() const noexcept { return h_; }
  double right() const noexcept { return x_ + w_; }
  double bottom() const noexcept { return y_ + h_; }
  double area() const noexcept { return w_ * h_; }

  bool contains(const BoundingBox& other) const noexcept;

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;

 private:
  double x_;
  double y_;
  double w_;
  double h_;
};

struct Point2 {
  double px = 0.0;
  double py = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

/// Symmetric boolean adjacency with an empty diagonal.
class AdjacencyMatrix {
 public:
  explicit AdjacencyMatrix(std::size_t n = 0) : n_(n), bits_(n * n, 0) {}

  std::size_t size() const noexcept { return n_; }
  bool adjacent(std::size_t i, std::size_t j) const { return bits_.at(i * n_ + j) != 0; }
  /// Sets both (i, j) and (j, i); self-loops are ignored.
  void connect(std::size_t i, std::size_t j);
  void disconnect(std::size_t i, std::size_t j);
  std::vector<std::size_t> neighbors(std::size_t i) const;
  /// Undirected edges (i < j) in lexicographic order.
  std::vector<std::pair<std::size_t, std::size_t>> edges() const;
  std::size_t edge_count() const;

  friend bool operator==(const AdjacencyMatrix&, const AdjacencyMatrix&) = default;

 private:
  std::size_t n_;
  std::vector<std::uint8_t> bits_;
};

/// An object box enlarged over its Delaunay neighbours. Confidence is inherited from the seed object.
struct PatchBox {
  BoundingBox box;
  std::size_t seed_index = 0;
  double confidence = 0.0;
  friend bool operator==(const PatchBox&, const PatchBox&) = default;
};

/// Geometric center (x + w/2, y + h/2).
Point2 center(const BoundingBox& b) noexcept;

/// Object adjacency from a Delaunay triangulation of the given centers.
///
/// Bowyer-Watson insertion over a symbolic super-triangle whose vertices sit at
/// infinity; every hull edge is kept. Points
/// are normalised into the unit square before the predicates run; in-circle and
/// orientation tests use an absolute tolerance of 1e-9 in that frame.
///
/// Degenerate input: n <= 1 gives no edges, n == 2 is a single edge, fully
/// collinear input becomes the nearest-neighbour chain along the line. A center
/// that duplicates an earlier one is nudged by +1e-6 px in x. When four points
/// are co-circular the diagonal touching the lowest input index is kept.
AdjacencyMatrix delaunay_adjacency(std::span<const Point2> centers);

/// Triangles (index triples, ascending) of the triangulation behind delaunay_adjacency.
/// Empty for degenerate inputs that fall back to chains.
std::vector<std::array<std::size_t, 3>> delaunay_triangles(std::span<const Point2> centers);

/// Each object's box grown to the union with all its adjacent boxes.
std::vector<PatchBox> expand_receptive_field(std::span<const BoundingBox> objects,
                                             std::span<const double> confidences,
                                             const AdjacencyMatrix& adj);

double iou(const BoundingBox& a, const BoundingBox& b) noexcept;

/// Greedy NMS. Survivors come back by descending confidence, ties by ascending seed_index.
std::vector<PatchBox> nms(std::span<const PatchBox> patches, double iou_threshold);

}  // namespace roomreid::geometry
