// Copyright 2026 The roomreid Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "roomreid/error.hpp"
#include "roomreid/eval.hpp"
#include "roomreid/synth.hpp"

using namespace roomreid;

TEST_CASE("generation is deterministic in the seed") {
  synth::SynthSpec spec;
  spec.viewpoint_noise = 0.5;
  spec.dropout = 0.2;
  spec.rng_seed = 42;
  const auto a = synth::generate(spec, 3);
  const auto b = synth::generate(spec, 3);
  CHECK(a.dataset == b.dataset);
  CHECK(a.truth == b.truth);
  spec.rng_seed = 43;
  CHECK_FALSE(synth::generate(spec, 3).dataset == a.dataset);
}

TEST_CASE("generated records are well formed") {
  synth::SynthSpec spec;
  spec.n_rooms = 5;
  spec.viewpoint_noise = 1.0;
  spec.dropout = 0.5;
  const auto g = synth::generate(spec, 2);
  CHECK(g.dataset.split(Split::kQuery).size() == 10);
  CHECK(g.dataset.split(Split::kReferencePool).size() == 15);
  CHECK(g.truth.size() == 25);
  for (const auto& r : g.dataset.records) {
    CHECK_NOTHROW(r.validate());
    CHECK(r.global_feature.dim() == spec.feature_dim);
    CHECK(r.selection_embedding.has_value());
    for (const auto& o : r.objects) {
      CHECK(o.confidence >= 0.0);
      CHECK(o.confidence <= 1.0);
    }
    CHECK(g.truth.at(r.image_id) == r.room_id);
  }
}

TEST_CASE("spec validation and json round trip") {
  synth::SynthSpec spec;
  spec.n_rooms = 0;
  CHECK_THROWS_AS(spec.validate(), DataError);
  spec = {};
  spec.objects_per_room = {5, 2};
  CHECK_THROWS_AS(spec.validate(), DataError);
  spec = {};
  spec.dropout = 1.0;
  CHECK_THROWS_AS(spec.validate(), DataError);
  spec = {};
  spec.n_rooms = 3;
  spec.viewpoint_noise = 0.25;
  spec.rng_seed = 99;
  const auto back = synth::spec_from_json(synth::to_json(spec));
  CHECK(synth::to_json(back) == synth::to_json(spec));
  CHECK_THROWS_AS(synth::spec_from_json(nlohmann::json{{"rooms", 3}}), DataError);
}

TEST_CASE("noiseless data is retrieved perfectly") {
  synth::SynthSpec spec;
  spec.n_rooms = 10;
  spec.rng_seed = 5;
  const auto g = synth::generate(spec, 3);
  const auto db = database::build_database(g.dataset.split(Split::kReferencePool), {}, ProviderBundle::builtin());
  const auto items = pipeline::query_batch(g.dataset.split(Split::kQuery), db, {}, ProviderBundle::builtin());
  CHECK(eval::score(eval::predictions_of(items), g.truth).accuracy == 1.0);
}

TEST_CASE("a single room still yields queries and references") {
  synth::SynthSpec spec;
  spec.n_rooms = 1;
  const auto g = synth::generate(spec, 1);
  CHECK(g.dataset.split(Split::kQuery).size() == 1);
  CHECK(g.dataset.split(Split::kReferencePool).size() == spec.reference_pool_views);
}
