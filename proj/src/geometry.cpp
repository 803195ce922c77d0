// Copyright 2026 The roomreid Authors
// SPDX-License-Identifier: Apache-2.0

#include "roomreid/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>

#include "roomreid/error.hpp"

namespace roomreid::geometry {

BoundingBox::BoundingBox(double x, double y, double w, double h) : x_(x), y_(y), w_(w), h_(h) {
  if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(w) || !std::isfinite(h)) {
    throw DataError("bounding box has a non-finite coordinate");
  }
  if (!(w > 0.0) || !(h > 0.0)) {
    throw DataError("bounding box must have positive width and height");
  }
}

bool BoundingBox::contains(const BoundingBox& other) const noexcept {
  // Allows for rounding in edges recomputed as origin + extent.
  auto le = [](double a, double b) { return a <= b + 1e-12 * std::max({1.0, std::abs(a), std::abs(b)}); };
  return le(x_, other.x_) && le(y_, other.y_) && le(other.right(), right()) && le(other.bottom(), bottom());
}

void AdjacencyMatrix::connect(std::size_t i, std::size_t j) {
  if (i >= n_ || j >= n_) throw std::out_of_range("adjacency index out of range");
  if (i == j) return;
  bits_[i * n_ + j] = 1;
  bits_[j * n_ + i] = 1;
}

void AdjacencyMatrix::disconnect(std::size_t i, std::size_t j) {
  if (i >= n_ || j >= n_) throw std::out_of_range("adjacency index out of range");
  bits_[i * n_ + j] = 0;
  bits_[j * n_ + i] = 0;
}

std::vector<std::size_t> AdjacencyMatrix::neighbors(std::size_t i) const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < n_; ++j) {
    if (adjacent(i, j)) out.push_back(j);
  }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> AdjacencyMatrix::edges() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i + 1; j < n_; ++j) {
      if (adjacent(i, j)) out.emplace_back(i, j);
    }
  }
  return out;
}

std::size_t AdjacencyMatrix::edge_count() const { return edges().size(); }

Point2 center(const BoundingBox& b) noexcept { return {b.x() + b.w() / 2.0, b.y() + b.h() / 2.0}; }

namespace {

constexpr double kEps = 1e-9;
constexpr double kDuplicateNudge = 1e-6;

struct Vec {
  double x;
  double y;
};

Vec sub(Vec a, Vec b) { return {a.x - b.x, a.y - b.y}; }
double cross(Vec a, Vec b) { return a.x * b.y - a.y * b.x; }
double dot(Vec a, Vec b) { return a.x * b.x + a.y * b.y; }

double orient(Vec a, Vec b, Vec c) { return cross(sub(b, a), sub(c, a)); }

// Positive when d is inside the circumcircle of (a, b, c), independent of the triangle's winding.
double incircle(Vec a, Vec b, Vec c, Vec d) {
  const double adx = a.x - d.x, ady = a.y - d.y;
  const double bdx = b.x - d.x, bdy = b.y - d.y;
  const double cdx = c.x - d.x, cdy = c.y - d.y;
  const double ad = adx * adx + ady * ady;
  const double bd = bdx * bdx + bdy * bdy;
  const double cd = cdx * cdx + cdy * cdy;
  const double det = adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
  return orient(a, b, c) > 0.0 ? det : -det;
}

// Nudges later duplicates to the right until every point is distinct.
std::vector<Vec> deduplicate(std::span<const Point2> centers) {
  std::vector<Vec> pts;
  pts.reserve(centers.size());
  for (const auto& c : centers) {
    Vec p{c.px, c.py};
    bool clash = true;
    while (clash) {
      clash = false;
      for (const auto& q : pts) {
        if (q.x == p.x && q.y == p.y) {
          p.x += kDuplicateNudge;
          clash = true;
          break;
        }
      }
    }
    pts.push_back(p);
  }
  return pts;
}

void normalise(std::vector<Vec>& pts) {
  double min_x = std::numeric_limits<double>::infinity(), min_y = min_x;
  double max_x = -min_x, max_y = -min_x;
  for (const auto& p : pts) {
    min_x = std::min(min_x, p.x);
    min_y = std::min(min_y, p.y);
    max_x = std::max(max_x, p.x);
    max_y = std::max(max_y, p.y);
  }
  const double extent = std::max(max_x - min_x, max_y - min_y);
  const double scale = extent > 0.0 ? 1.0 / extent : 1.0;
  for (auto& p : pts) p = {(p.x - min_x) * scale, (p.y - min_y) * scale};
}

// Returns the point order along the line when every point is within tolerance of it.
std::optional<std::vector<std::size_t>> collinear_order(const std::vector<Vec>& pts) {
  std::size_t a = 0, b = 0;
  double best = -1.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const Vec d = sub(pts[j], pts[i]);
      if (dot(d, d) > best) {
        best = dot(d, d);
        a = i;
        b = j;
      }
    }
  }
  const Vec dir = sub(pts[b], pts[a]);
  const double len = std::sqrt(dot(dir, dir));
  for (const auto& p : pts) {
    if (std::abs(cross(dir, sub(p, pts[a]))) / len > kEps) return std::nullopt;
  }
  std::vector<std::size_t> order(pts.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return dot(sub(pts[i], pts[a]), dir) < dot(sub(pts[j], pts[a]), dir);
  });
  return order;
}

using Triangle = std::array<std::size_t, 3>;

// Bowyer-Watson with the three super-triangle vertices placed at infinity along fixed
// directions. Vertex ids >= n are symbolic; their circumcircles degenerate to half-planes.
class Triangulator {
 public:
  explicit Triangulator(const std::vector<Vec>& pts) : pts_(pts), n_(pts.size()) {
    // Directions sit off the coordinate axes.
    constexpr double kOffset = 0.3141592653589793;
    for (int k = 0; k < 3; ++k) {
      const double angle = kOffset + k * 2.0 * 3.14159265358979323846 / 3.0;
      dirs_[k] = {std::cos(angle), std::sin(angle)};
    }
    tris_.push_back({n_, n_ + 1, n_ + 2});
  }

  std::vector<Triangle> run() {
    for (std::size_t p = 0; p < n_; ++p) insert(p);
    std::vector<Triangle> finite;
    for (auto t : tris_) {
      if (t[0] < n_ && t[1] < n_ && t[2] < n_) {
        std::sort(t.begin(), t.end());
        finite.push_back(t);
      }
    }
    return finite;
  }

 private:
  bool is_inf(std::size_t v) const { return v >= n_; }
  Vec dir(std::size_t v) const { return dirs_[v - n_]; }

  bool in_circumcircle(const Triangle& t, std::size_t pi) const {
    const Vec p = pts_[pi];
    std::array<std::size_t, 3> fin{}, inf{};
    std::size_t nf = 0, ni = 0;
    for (auto v : t) (is_inf(v) ? inf[ni++] : fin[nf++]) = v;
    if (ni == 0) return incircle(pts_[fin[0]], pts_[fin[1]], pts_[fin[2]], p) > kEps;
    if (ni == 3) return true;
    if (ni == 2) {
      // Circle through a and two far points tends to the half-plane facing di + dj.
      const Vec a = pts_[fin[0]];
      const Vec di = dir(inf[0]), dj = dir(inf[1]);
      return dot(sub(p, a), Vec{di.x + dj.x, di.y + dj.y}) > kEps;
    }
    // One infinite vertex: half-plane beyond edge ab on the side the direction points to,
    // plus the open segment ab itself.
    const Vec a = pts_[fin[0]], b = pts_[fin[1]];
    const Vec ab = sub(b, a);
    const double side = cross(ab, dir(inf[0])) > 0.0 ? 1.0 : -1.0;
    const double s = side * cross(ab, sub(p, a)) / std::sqrt(dot(ab, ab));
    if (s > kEps) return true;
    if (s < -kEps) return false;
    const double u = dot(sub(p, a), ab) / dot(ab, ab);
    return u > 0.0 && u < 1.0;
  }

  void insert(std::size_t p) {
    std::vector<Triangle> bad, keep;
    for (const auto& t : tris_) (in_circumcircle(t, p) ? bad : keep).push_back(t);
    if (bad.empty()) throw InvariantError("delaunay insertion found no enclosing circumcircle");
    std::map<std::pair<std::size_t, std::size_t>, int> edge_uses;
    for (const auto& t : bad) {
      for (int e = 0; e < 3; ++e) {
        auto u = t[e], v = t[(e + 1) % 3];
        if (u > v) std::swap(u, v);
        ++edge_uses[{u, v}];
      }
    }
    for (const auto& [edge, uses] : edge_uses) {
      if (uses == 1) keep.push_back({edge.first, edge.second, p});
    }
    tris_ = std::move(keep);
  }

  const std::vector<Vec>& pts_;
  std::size_t n_;
  std::array<Vec, 3> dirs_{};
  std::vector<Triangle> tris_;
};

Triangle sorted(Triangle t) {
  std::sort(t.begin(), t.end());
  return t;
}

std::size_t opposite(const Triangle& t, std::size_t u, std::size_t v) {
  for (auto w : t) {
    if (w != u && w != v) return w;
  }
  throw InvariantError("triangle does not contain the shared edge");
}

// Among co-circular quads, keep the diagonal incident to the lowest vertex index.
void resolve_cocircular(const std::vector<Vec>& pts, std::vector<Triangle>& tris) {
  const std::size_t max_rounds = tris.size() * tris.size() + 1;
  for (std::size_t round = 0; round < max_rounds; ++round) {
    bool flipped = false;
    for (std::size_t i = 0; i < tris.size() && !flipped; ++i) {
      for (std::size_t j = i + 1; j < tris.size() && !flipped; ++j) {
        std::vector<std::size_t> shared;
        for (auto a : tris[i]) {
          if (std::find(tris[j].begin(), tris[j].end(), a) != tris[j].end()) shared.push_back(a);
        }
        if (shared.size() != 2) continue;
        const std::size_t u = shared[0], v = shared[1];
        const std::size_t a = opposite(tris[i], u, v), b = opposite(tris[j], u, v);
        if (std::abs(incircle(pts[u], pts[v], pts[a], pts[b])) > kEps) continue;
        if (std::min(a, b) > std::min(u, v)) continue;
        tris[i] = sorted({a, b, u});
        tris[j] = sorted({a, b, v});
        flipped = true;
      }
    }
    if (!flipped) return;
  }
  throw InvariantError("co-circular diagonal resolution did not converge");
}

std::vector<Triangle> triangulate(const std::vector<Vec>& pts) {
  auto tris = Triangulator(pts).run();
  resolve_cocircular(pts, tris);
  std::sort(tris.begin(), tris.end());
  return tris;
}

}  // namespace

std::vector<std::array<std::size_t, 3>> delaunay_triangles(std::span<const Point2> centers) {
  if (centers.size() < 3) return {};
  auto pts = deduplicate(centers);
  normalise(pts);
  if (collinear_order(pts)) return {};
  return triangulate(pts);
}

AdjacencyMatrix delaunay_adjacency(std::span<const Point2> centers) {
  const std::size_t n = centers.size();
  AdjacencyMatrix adj(n);
  if (n < 2) return adj;
  if (n == 2) {
    adj.connect(0, 1);
    return adj;
  }
  auto pts = deduplicate(centers);
  normalise(pts);
  if (auto chain = collinear_order(pts)) {
    for (std::size_t k = 1; k < chain->size(); ++k) adj.connect((*chain)[k - 1], (*chain)[k]);
    return adj;
  }
  for (const auto& t : triangulate(pts)) {
    adj.connect(t[0], t[1]);
    adj.connect(t[1], t[2]);
    adj.connect(t[0], t[2]);
  }
  return adj;
}

std::vector<PatchBox> expand_receptive_field(std::span<const BoundingBox> objects,
                                             std::span<const double> confidences,
                                             const AdjacencyMatrix& adj) {
  if (adj.size() != objects.size()) {
    throw DimensionMismatch("adjacency size vs object count", objects.size(), adj.size());
  }
  if (confidences.size() != objects.size()) {
    throw DimensionMismatch("confidence count vs object count", objects.size(), confidences.size());
  }
  std::vector<PatchBox> patches;
  patches.reserve(objects.size());
  for (std::size_t i = 0; i < objects.size(); ++i) {
    double left = objects[i].x(), top = objects[i].y();
    double right = objects[i].right(), bottom = objects[i].bottom();
    for (std::size_t j : adj.neighbors(i)) {
      left = std::min(left, objects[j].x());
      top = std::min(top, objects[j].y());
      right = std::max(right, objects[j].right());
      bottom = std::max(bottom, objects[j].bottom());
    }
    // Unchanged coordinates keep the seed box bit-identical when nothing widens it.
    const double w = right == objects[i].right() && left == objects[i].x() ? objects[i].w() : right - left;
    const double h = bottom == objects[i].bottom() && top == objects[i].y() ? objects[i].h() : bottom - top;
    patches.push_back({BoundingBox(left, top, w, h), i, confidences[i]});
  }
  return patches;
}

double iou(const BoundingBox& a, const BoundingBox& b) noexcept {
  const double iw = std::min(a.right(), b.right()) - std::max(a.x(), b.x());
  const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.y(), b.y());
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  return inter / (a.area() + b.area() - inter);
}

std::vector<PatchBox> nms(std::span<const PatchBox> patches, double iou_threshold) {
  if (!(iou_threshold >= 0.0 && iou_threshold <= 1.0)) {
    throw DataError("nms iou threshold must lie in [0, 1]");
  }
  std::vector<PatchBox> order(patches.begin(), patches.end());
  std::stable_sort(order.begin(), order.end(), [](const PatchBox& a, const PatchBox& b) {
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    return a.seed_index < b.seed_index;
  });
  std::vector<PatchBox> kept;
  std::vector<bool> suppressed(order.size(), false);
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (suppressed[i]) continue;
    kept.push_back(order[i]);
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      if (!suppressed[j] && iou(order[i].box, order[j].box) > iou_threshold) suppressed[j] = true;
    }
  }
  return kept;
}

}  // namespace roomreid::geometry
