// Copyright 2026 The roomreid Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "roomreid/error.hpp"
#include "roomreid/providers.hpp"
#include "support.hpp"

using namespace roomreid;
using support::fv;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "roomreid_provider_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

void write_text(const std::filesystem::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_CASE("pooling provider averages the unit features of objects centred in each patch") {
  auto img = support::record("img", "R", Split::kReferencePool, fv({1, 0}));
  img.objects = {support::object(0, 0, 10, 10, 0.9, fv({2, 0})), support::object(20, 0, 10, 10, 0.8, fv({0, 5})),
                 support::object(100, 100, 10, 10, 0.7, fv({0, 1}))};
  const std::vector<geometry::PatchBox> patches{{geometry::BoundingBox(0, 0, 30, 10), 0, 0.9},
                                                {geometry::BoundingBox(100, 100, 10, 10), 2, 0.7}};
  ObjectPoolingPatchProvider p;
  const auto f = p.patch_features(img, img.objects, patches);
  REQUIRE(f.size() == 2);
  CHECK(f[0] == fv({0.5f, 0.5f}));
  CHECK(f[1] == fv({0, 1}));
}

TEST_CASE("builtin fine matcher counts confident keypoint pairs") {
  auto q = support::record("q", "R", Split::kQuery, fv({1, 0}));
  auto r = support::record("r", "R", Split::kReferencePool, fv({1, 0}));
  q.keypoint_descriptors = {fv({1, 0, 0}), fv({0, 1, 0}), fv({0, 0, 1})};
  r.keypoint_descriptors = {fv({1, 0.1f, 0}), fv({0, 1, 1}), fv({0, 0, 1})};
  // Pairs (0,0), (1,1) and (2,2) are mutual; (1,1) has cosine 0.707 and falls below the cut.
  const auto n = builtin_fine_matcher(q, r);
  CHECK(n == 2);
  CHECK(builtin_fine_matcher(q, support::record("e", "R", Split::kReferencePool, fv({1, 0}))) == 0);
}

TEST_CASE("match-count table round trip and lookup") {
  MatchCountTable table({{{"q1", "r1"}, 12}, {{"q1", "r2"}, 0}, {{"q2", "r1"}, 7}});
  const auto path = temp_file("counts.tsv");
  table.save(path);
  const auto loaded = MatchCountTable::load(path);
  CHECK(loaded.size() == 3);
  auto copy = loaded;
  const auto q1 = support::record("q1", "A", Split::kQuery, fv({1}));
  const auto r1 = support::record("r1", "A", Split::kReferencePool, fv({1}));
  const auto r3 = support::record("r3", "A", Split::kReferencePool, fv({1}));
  CHECK(copy.match_count(q1, r1) == 12);
  CHECK_THROWS_AS(copy.match_count(q1, r3), NotFoundError);
}

TEST_CASE("match-count table format errors") {
  const auto path = temp_file("bad.tsv");
  write_text(path, "q\tr\t3\n");
  CHECK_THROWS_AS(MatchCountTable::load(path), FormatError);
  write_text(path, "# roomreid-match-counts v1\nq\tr\n");
  CHECK_THROWS_AS(MatchCountTable::load(path), FormatError);
  write_text(path, "# roomreid-match-counts v1\nq\tr\t-1\n");
  CHECK_THROWS_AS(MatchCountTable::load(path), FormatError);
  write_text(path, "# roomreid-match-counts v1\nq\tr\t1\nq\tr\t2\n");
  CHECK_THROWS_AS(MatchCountTable::load(path), FormatError);
  CHECK_THROWS_AS(MatchCountTable::load(temp_file("absent.tsv")), NotFoundError);
}
