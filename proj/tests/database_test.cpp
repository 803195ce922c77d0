// Copyright 2026 The roomreid Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

#include "roomreid/database.hpp"
#include "roomreid/error.hpp"
#include "roomreid/synth.hpp"
#include "support.hpp"

using namespace roomreid;
using namespace roomreid::database;
using support::fv;

namespace {

SceneRecord pool_record(const std::string& image, const std::string& room, float ex, float ey) {
  auto r = support::record(image, room, Split::kReferencePool, fv({1, 0, 0}));
  r.selection_embedding = fv({ex, ey == 0.0f && ex == 0.0f ? 1e-3f : ey});
  return r;
}

std::vector<SceneRecord> small_pool() {
  synth::SynthSpec spec;
  spec.n_rooms = 4;
  spec.viewpoint_noise = 0.2;
  spec.rng_seed = 3;
  return synth::generate(spec, 1).dataset.split(Split::kReferencePool);
}

std::filesystem::path temp_file(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "roomreid_db_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("reference selection picks the image closest to the room centroid") {
  std::vector<SceneRecord> c{pool_record("a", "R", 1, 0), pool_record("b", "R", 2, 0), pool_record("c", "R", 10, 0)};
  // Centroid (13/3, 0): distances 3.33, 2.33, 5.67.
  CHECK(select_reference(c) == "b");
  std::reverse(c.begin(), c.end());
  CHECK(select_reference(c) == "b");
  std::rotate(c.begin(), c.begin() + 1, c.end());
  CHECK(select_reference(c) == "b");
}

TEST_CASE("reference selection ties go to the smaller image id") {
  std::vector<SceneRecord> c{pool_record("z", "R", 1, 0), pool_record("m", "R", -1, 0)};
  CHECK(select_reference(c) == "m");
}

TEST_CASE("reference selection falls back to the global feature") {
  auto a = support::record("a", "R", Split::kReferencePool, fv({1, 0}));
  auto b = support::record("b", "R", Split::kReferencePool, fv({0, 1}));
  auto c = support::record("c", "R", Split::kReferencePool, fv({1, 0.2f}));
  CHECK(select_reference(std::vector<SceneRecord>{a, b, c}) == "c");
  c.selection_embedding = fv({1, 1});
  CHECK_THROWS_AS(select_reference(std::vector<SceneRecord>{a, b, c}), DataError);
  CHECK_THROWS_AS(select_reference(std::vector<SceneRecord>{}), DataError);
}

TEST_CASE("build applies the object confidence threshold to references") {
  auto r = support::record("img", "R", Split::kReferencePool, fv({1, 0}));
  r.objects = {support::object(0, 0, 10, 10, 0.9, fv({1, 0})), support::object(50, 0, 10, 10, 0.3, fv({0, 1})),
               support::object(0, 50, 10, 10, 0.6, fv({1, 1}))};
  scoring::ScoringConfig cfg;
  cfg.object_conf_threshold = 0.5;
  const auto db = build_database(std::vector<SceneRecord>{r}, cfg, ProviderBundle::builtin());
  CHECK(db.refs.at("R").objects.size() == 2);
  CHECK(db.build_config == cfg);
}

TEST_CASE("rooms without objects get an empty patch list") {
  const auto r = support::record("img", "R", Split::kReferencePool, fv({1, 0}));
  const auto db = build_database(std::vector<SceneRecord>{r}, {}, ProviderBundle::builtin());
  CHECK(db.room_count() == 1);
  CHECK(db.patches.at("R").empty());
}

TEST_CASE("build rejects duplicate ids and mixed dimensions") {
  const auto a = support::record("img", "R", Split::kReferencePool, fv({1, 0}));
  CHECK_THROWS_AS(build_database(std::vector<SceneRecord>{a, a}, {}, ProviderBundle::builtin()), DataError);
  const auto b = support::record("other", "S", Split::kReferencePool, fv({1, 0, 0}));
  CHECK_THROWS_AS(build_database(std::vector<SceneRecord>{a, b}, {}, ProviderBundle::builtin()), DimensionMismatch);
}

TEST_CASE("patches for a reference survive NMS and lie within the image objects") {
  const auto pool = small_pool();
  const auto db = build_database(pool, {}, ProviderBundle::builtin());
  CHECK(db.room_count() == 4);
  for (const auto& [room, entries] : db.patches) {
    const auto& ref = db.refs.at(room);
    CHECK(entries.size() <= ref.objects.size());
    for (const auto& e : entries) CHECK(e.patch.box.contains(ref.objects.at(e.patch.seed_index).box));
  }
}

TEST_CASE("index round trip and byte-identical rebuild") {
  const auto pool = small_pool();
  const auto db = build_database(pool, {}, ProviderBundle::builtin());
  const auto bytes = serialize(db);
  CHECK(deserialize(bytes) == db);

  auto shuffled = pool;
  std::mt19937_64 rng(1);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  CHECK(serialize(build_database(shuffled, {}, ProviderBundle::builtin())) == bytes);

  const auto path = temp_file("round_trip.rrdb");
  save_database(db, path);
  CHECK(load_database(path) == db);
  CHECK_THROWS_AS(load_database(temp_file("absent.rrdb")), NotFoundError);
}

TEST_CASE("corrupted indexes are rejected with a specific error") {
  const auto db = build_database(small_pool(), {}, ProviderBundle::builtin());
  const auto bytes = serialize(db);

  SUBCASE("version") {
    auto b = bytes;
    b[4] ^= 0x01;
    CHECK_THROWS_AS(deserialize(b), VersionMismatch);
  }
  SUBCASE("magic") {
    auto b = bytes;
    b[0] = 'X';
    CHECK_THROWS_AS(deserialize(b), FormatError);
  }
  SUBCASE("truncation") {
    for (std::size_t cut : {std::size_t{3}, std::size_t{20}, bytes.size() / 2, bytes.size() - 1}) {
      const std::vector<std::uint8_t> b(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(cut));
      CHECK_THROWS_AS(deserialize(b), TruncatedFile);
    }
  }
  SUBCASE("payload bit flip") {
    auto b = bytes;
    b[b.size() / 2] ^= 0x40;
    CHECK_THROWS_AS(deserialize(b), ChecksumMismatch);
  }
  SUBCASE("trailing bytes") {
    auto b = bytes;
    b.push_back(0);
    CHECK_THROWS_AS(deserialize(b), FormatError);
  }
}
