// Copyright 2026 The roomreid Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "oracle/oracle.hpp"
#include "roomreid/error.hpp"
#include "roomreid/geometry.hpp"

using namespace roomreid::geometry;

namespace {

std::set<oracle::Edge> edge_set(const AdjacencyMatrix& adj) {
  std::set<oracle::Edge> out;
  for (const auto& e : adj.edges()) out.insert(e);
  return out;
}

std::vector<std::array<double, 2>> as_arrays(const std::vector<Point2>& pts) {
  std::vector<std::array<double, 2>> out;
  for (const auto& p : pts) out.push_back({p.px, p.py});
  return out;
}

std::vector<Point2> random_points(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> x(0.0, 640.0), y(0.0, 480.0);
  std::vector<Point2> pts;
  for (std::size_t i = 0; i < n; ++i) pts.push_back({x(rng), y(rng)});
  return pts;
}

}  // namespace

TEST_CASE("bounding box rejects non-positive extent and non-finite coordinates") {
  CHECK_THROWS_AS(BoundingBox(0, 0, 0, 1), roomreid::DataError);
  CHECK_THROWS_AS(BoundingBox(0, 0, 1, -1), roomreid::DataError);
  CHECK_THROWS_AS(BoundingBox(std::nan(""), 0, 1, 1), roomreid::DataError);
}

TEST_CASE("center is the geometric box center") {
  CHECK(center(BoundingBox(0, 0, 10, 20)) == Point2{5, 10});
  CHECK(center(BoundingBox(2, 4, 10, 20)) == Point2{7, 14});
  CHECK(center(BoundingBox(-3, -3, 6, 6)) == Point2{0, 0});
}

TEST_CASE("delaunay degenerate inputs") {
  CHECK(delaunay_adjacency({}).size() == 0);

  const std::vector<Point2> one{{1, 1}};
  const auto a1 = delaunay_adjacency(one);
  CHECK(a1.size() == 1);
  CHECK(a1.edge_count() == 0);

  const std::vector<Point2> two{{1, 1}, {5, 9}};
  CHECK(delaunay_adjacency(two).adjacent(0, 1));

  SUBCASE("collinear points form a chain in line order") {
    const std::vector<Point2> line{{10, 10}, {30, 30}, {0, 0}, {20, 20}};
    const auto adj = delaunay_adjacency(line);
    const std::set<oracle::Edge> expected{{0, 2}, {0, 3}, {1, 3}};
    CHECK(edge_set(adj) == expected);
  }

  SUBCASE("duplicate centers stay total") {
    const std::vector<Point2> dup{{0, 0}, {10, 0}, {0, 0}, {5, 8}};
    const auto adj = delaunay_adjacency(dup);
    CHECK(adj.size() == 4);
    CHECK(adj.adjacent(0, 2));
    for (std::size_t i = 0; i < 4; ++i) CHECK(!adj.neighbors(i).empty());
  }
}

TEST_CASE("delaunay of a triangle connects all three pairs") {
  const std::vector<Point2> tri{{0, 0}, {4, 0}, {1, 3}};
  const auto adj = delaunay_adjacency(tri);
  CHECK(adj.edge_count() == 3);
}

TEST_CASE("co-circular square keeps the diagonal through the lowest index") {
  // Both triangulations of a square pass the empty-circumcircle test.
  const std::vector<Point2> square{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  const auto tris = oracle::empty_circle_triangles(as_arrays(square));
  CHECK(tris.size() == 4);

  const auto adj = delaunay_adjacency(square);
  CHECK(adj.edge_count() == 5);
  CHECK(adj.adjacent(0, 1));
  CHECK(adj.adjacent(1, 2));
  CHECK(adj.adjacent(2, 3));
  CHECK(adj.adjacent(0, 3));
  CHECK(adj.adjacent(0, 2));
  CHECK_FALSE(adj.adjacent(1, 3));

  SUBCASE("insertion order does not change the choice") {
    const std::vector<Point2> permuted{{1, 1}, {0, 0}, {1, 0}, {0, 1}};
    const auto p = delaunay_adjacency(permuted);
    // Index 0 is now (1,1); its diagonal goes to (0,0) at index 1.
    CHECK(p.adjacent(0, 1));
    CHECK_FALSE(p.adjacent(2, 3));
  }
}

TEST_CASE("delaunay matches the brute-force empty circumcircle oracle") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 3 + trial % 10;
    const auto pts = random_points(rng, n);
    const auto adj = delaunay_adjacency(pts);
    REQUIRE(edge_set(adj) == oracle::delaunay_edges_bruteforce(as_arrays(pts)));
  }
}

TEST_CASE("delaunay handles grid-aligned and hull-collinear layouts") {
  // A 3x3 grid has many co-circular quads and collinear hull runs.
  std::vector<Point2> grid;
  for (int y = 0; y < 3; ++y) {
    for (int x = 0; x < 3; ++x) grid.push_back({x * 100.0, y * 100.0});
  }
  const auto adj = delaunay_adjacency(grid);
  // 8 hull edges + 4 inner spokes... every cell contributes exactly one diagonal.
  CHECK(adj.edge_count() == 16);
  for (std::size_t i = 0; i < adj.size(); ++i) CHECK_FALSE(adj.adjacent(i, i));
  // Hull runs never skip their middle point.
  CHECK_FALSE(adj.adjacent(0, 2));
  CHECK_FALSE(adj.adjacent(6, 8));
  // Every accepted triangle is an empty-circle triangle.
  const auto oracle_tris = oracle::empty_circle_triangles(as_arrays(grid));
  for (const auto& t : delaunay_triangles(grid)) {
    CHECK(std::find(oracle_tris.begin(), oracle_tris.end(), t) != oracle_tris.end());
  }
}

TEST_CASE("delaunay output triangles satisfy the empty circumcircle property") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const auto pts = random_points(rng, 3 + trial % 10);
    const auto oracle_tris = oracle::empty_circle_triangles(as_arrays(pts));
    for (const auto& t : delaunay_triangles(pts)) {
      REQUIRE(std::find(oracle_tris.begin(), oracle_tris.end(), t) != oracle_tris.end());
    }
  }
}

TEST_CASE("adjacency is symmetric with an empty diagonal") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto adj = delaunay_adjacency(random_points(rng, 1 + trial % 15));
    for (std::size_t i = 0; i < adj.size(); ++i) {
      CHECK_FALSE(adj.adjacent(i, i));
      for (std::size_t j = 0; j < adj.size(); ++j) CHECK(adj.adjacent(i, j) == adj.adjacent(j, i));
    }
  }
}

TEST_CASE("receptive field expansion") {
  SUBCASE("isolated object keeps its box") {
    const std::vector<BoundingBox> objs{BoundingBox(0, 0, 2, 2)};
    const std::vector<double> conf{0.7};
    const auto patches = expand_receptive_field(objs, conf, AdjacencyMatrix(1));
    REQUIRE(patches.size() == 1);
    CHECK(patches[0].box == BoundingBox(0, 0, 2, 2));
    CHECK(patches[0].confidence == 0.7);
  }
  SUBCASE("mutual neighbours share the union box") {
    const std::vector<BoundingBox> objs{BoundingBox(0, 0, 2, 2), BoundingBox(4, 0, 2, 2)};
    const std::vector<double> conf{0.9, 0.8};
    AdjacencyMatrix adj(2);
    adj.connect(0, 1);
    const auto patches = expand_receptive_field(objs, conf, adj);
    CHECK(patches[0].box == BoundingBox(0, 0, 6, 2));
    CHECK(patches[1].box == BoundingBox(0, 0, 6, 2));
    CHECK(patches[1].seed_index == 1);
  }
  SUBCASE("expansion covers direct neighbours only") {
    const std::vector<BoundingBox> objs{BoundingBox(0, 0, 2, 2), BoundingBox(4, 0, 2, 2), BoundingBox(8, 0, 2, 2)};
    const std::vector<double> conf{1, 1, 1};
    AdjacencyMatrix adj(3);
    adj.connect(0, 1);
    adj.connect(1, 2);
    const auto patches = expand_receptive_field(objs, conf, adj);
    CHECK(patches[0].box.right() == 6.0);
    CHECK(patches[1].box == BoundingBox(0, 0, 10, 2));
    CHECK(patches[2].box.x() == 4.0);
  }
  SUBCASE("adjacency size must match") {
    const std::vector<BoundingBox> objs{BoundingBox(0, 0, 2, 2)};
    const std::vector<double> conf{1};
    CHECK_THROWS_AS(expand_receptive_field(objs, conf, AdjacencyMatrix(2)), roomreid::DimensionMismatch);
  }
}

TEST_CASE("expanded patches contain their seed box") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> pos(0, 500), ext(5, 120);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<BoundingBox> boxes;
    std::vector<Point2> centers;
    std::vector<double> conf;
    for (int i = 0; i < 1 + trial % 12; ++i) {
      boxes.emplace_back(pos(rng), pos(rng), ext(rng), ext(rng));
      centers.push_back(center(boxes.back()));
      conf.push_back(0.5);
    }
    const auto patches = expand_receptive_field(boxes, conf, delaunay_adjacency(centers));
    for (const auto& p : patches) CHECK(p.box.contains(boxes[p.seed_index]));
  }
}

TEST_CASE("iou fixtures") {
  const BoundingBox a(0, 0, 2, 2);
  CHECK(iou(a, a) == 1.0);
  CHECK(iou(a, BoundingBox(5, 5, 1, 1)) == 0.0);
  CHECK(iou(a, BoundingBox(2, 0, 2, 2)) == 0.0);  // touching edges
  CHECK(iou(a, BoundingBox(1, 0, 2, 2)) == doctest::Approx(2.0 / 6.0).epsilon(1e-15));
}

TEST_CASE("iou is symmetric") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> pos(0, 100), ext(1, 60);
  for (int i = 0; i < 500; ++i) {
    const BoundingBox a(pos(rng), pos(rng), ext(rng), ext(rng));
    const BoundingBox b(pos(rng), pos(rng), ext(rng), ext(rng));
    CHECK(std::abs(iou(a, b) - iou(b, a)) <= 1e-12);
  }
}

TEST_CASE("nms fixtures") {
  const PatchBox p0{BoundingBox(0, 0, 10, 10), 0, 0.9};
  const PatchBox p1{BoundingBox(0, 0, 10, 10), 1, 0.8};
  CHECK(nms(std::vector<PatchBox>{p0}, 0.5) == std::vector<PatchBox>{p0});
  CHECK(nms(std::vector<PatchBox>{p1, p0}, 0.5) == std::vector<PatchBox>{p0});
  CHECK_THROWS_AS(nms(std::vector<PatchBox>{p0}, 1.5), roomreid::DataError);

  SUBCASE("equal confidence keeps the lower seed index") {
    const PatchBox q0{BoundingBox(0, 0, 10, 10), 3, 0.5};
    const PatchBox q1{BoundingBox(1, 1, 10, 10), 2, 0.5};
    const auto kept = nms(std::vector<PatchBox>{q0, q1}, 0.3);
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].seed_index == 2);
  }
}

TEST_CASE("nms matches the reference greedy implementation and its invariants") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> pos(0, 60), ext(5, 40), conf(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<PatchBox> patches;
    std::vector<oracle::Scored> ref;
    for (std::size_t i = 0; i < 5 + trial % 8; ++i) {
      const double x = pos(rng), y = pos(rng), w = ext(rng), h = ext(rng);
      // Coarse confidences force ties.
      const double c = std::round(conf(rng) * 4) / 4;
      patches.push_back({BoundingBox(x, y, w, h), i, c});
      ref.push_back({{x, y, w, h}, i, c});
    }
    const double thr = (trial % 5) * 0.2;
    const auto kept = nms(patches, thr);
    const auto expected = oracle::nms_reference(ref, thr);
    REQUIRE(kept.size() == expected.size());
    for (std::size_t i = 0; i < kept.size(); ++i) CHECK(kept[i].seed_index == expected[i].seed);
    for (std::size_t i = 0; i < kept.size(); ++i) {
      if (i > 0) CHECK(kept[i - 1].confidence >= kept[i].confidence);
      for (std::size_t j = i + 1; j < kept.size(); ++j) CHECK(iou(kept[i].box, kept[j].box) <= thr);
    }
  }
}
