// Copyright 2026 The roomreid Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "roomreid/error.hpp"
#include "roomreid/eval.hpp"
#include "roomreid/synth.hpp"

using namespace roomreid;
using namespace roomreid::eval;

namespace {

const std::map<std::string, std::string> kTruth{{"q1", "A"}, {"q2", "A"}, {"q3", "B"}, {"q4", "B"}};

}  // namespace

TEST_CASE("metrics fixture") {
  const std::map<std::string, std::string> pred{{"q1", "A"}, {"q2", "B"}, {"q3", "B"}, {"q4", "B"}};
  const auto m = score(pred, kTruth);
  CHECK(m.queries == 4);
  CHECK(std::abs(m.accuracy - 0.75) <= 1e-9);
  CHECK(std::abs(m.macro_precision - (1.0 + 2.0 / 3.0) / 2) <= 1e-9);
  CHECK(std::abs(m.macro_recall - 0.75) <= 1e-9);
  CHECK(std::abs(m.macro_f1 - (2.0 / 3.0 + 0.8) / 2) <= 1e-9);
  REQUIRE(m.per_class.size() == 2);
  CHECK(m.per_class[0].room_id == "A");
  CHECK(m.per_class[0].support == 2);
}

TEST_CASE("a constant prediction over balanced classes scores 1/k") {
  std::map<std::string, std::string> truth, pred;
  const std::vector<std::string> rooms{"A", "B", "C", "D"};
  for (std::size_t i = 0; i < 12; ++i) {
    truth["q" + std::to_string(i)] = rooms[i % 4];
    pred["q" + std::to_string(i)] = "A";
  }
  const auto m = score(pred, truth);
  CHECK(m.accuracy == doctest::Approx(0.25));
  CHECK(m.macro_recall == doctest::Approx(0.25));
  // Only A has predictions: precision 1/4, the rest 0.
  CHECK(m.macro_precision == doctest::Approx(0.0625));
}

TEST_CASE("predicted classes absent from truth do not enter the macro average") {
  const std::map<std::string, std::string> pred{{"q1", "Z"}, {"q2", "A"}, {"q3", "B"}, {"q4", "B"}};
  const auto m = score(pred, kTruth);
  CHECK(m.per_class.size() == 2);
  CHECK(m.macro_precision == doctest::Approx(1.0));
}

TEST_CASE("scoring errors") {
  CHECK_THROWS_AS(score({}, kTruth), DataError);
  CHECK_THROWS_AS(score({{"q9", "A"}}, kTruth), DataError);
}

TEST_CASE("confusion matrix sums") {
  ConfusionMatrix cm({"B", "A", "A"});
  CHECK(cm.classes() == std::vector<std::string>{"A", "B"});
  cm.add("A", "B");
  cm.add("B", "B");
  CHECK(cm.total() == 2);
  CHECK(cm.trace() == 1);
  CHECK(cm.col_sum(1) == 2);
  CHECK_THROWS_AS(cm.add("C", "A"), DataError);
}

TEST_CASE("compare table marks the best value per column") {
  MetricReport good, bad;
  good.accuracy = good.macro_precision = good.macro_recall = good.macro_f1 = 0.9;
  bad.accuracy = 0.5;
  bad.macro_precision = 0.95;
  const std::vector<std::pair<std::string, MetricReport>> runs{{"Full", good}, {"Other", bad}};
  const auto table = compare_table(runs);
  CHECK(table.find("Method") == 0);
  CHECK(table.find("90.00*") != std::string::npos);
  CHECK(table.find("95.00*") != std::string::npos);
  CHECK(table.find("50.00 ") != std::string::npos);
  CHECK(table.find("90.00 ") != std::string::npos);  // Full's precision is not the best
}

TEST_CASE("ablation set order and flags") {
  const auto set = ablation_set({});
  const std::vector<std::string> expected{"Full",
                                          "w/o s_patch",
                                          "w/o s_object",
                                          "w/o FGR",
                                          "w/o s_patch & s_object",
                                          "w/o s_patch & FGR",
                                          "w/o s_object & FGR",
                                          "Global only",
                                          "w/o s_global"};
  REQUIRE(set.size() == expected.size());
  for (std::size_t i = 0; i < set.size(); ++i) CHECK(set[i].label == expected[i]);
  CHECK_FALSE(set[7].config.use_patch);
  CHECK_FALSE(set[7].config.use_object);
  CHECK_FALSE(set[7].config.use_fine_grained);
  CHECK_FALSE(set[8].config.use_global);
}

TEST_CASE("ablation runs, timing attachment and report records") {
  synth::SynthSpec spec;
  spec.n_rooms = 5;
  spec.viewpoint_noise = 0.5;
  spec.rng_seed = 3;
  const auto g = synth::generate(spec, 2);
  const auto db = database::build_database(g.dataset.split(Split::kReferencePool), {}, ProviderBundle::builtin());
  const auto runs = run_ablations(g.dataset.split(Split::kQuery), g.truth, db, {}, ProviderBundle::builtin());
  REQUIRE(runs.size() == 9);
  for (const auto& r : runs) {
    CHECK(r.report.queries == 10);
    REQUIRE(r.report.stage_timings_us.size() == 7);
    CHECK(r.report.stage_timings_us[6].first == "Fine-Grained Retrieval");
  }
  const auto rec = report_record(runs[0].label, runs[0].report);
  CHECK(rec["schema"] == "roomreid.metrics/1");
  CHECK(rec["stage_timings_us"].size() == 7);

  std::vector<std::pair<std::string, MetricReport>> rows;
  for (const auto& r : runs) rows.emplace_back(r.label, r.report);
  const auto timing = timing_table(rows);
  CHECK(timing.find("Receptive Field Expander") != std::string::npos);
  CHECK(timing.find("Total") != std::string::npos);
}

TEST_CASE("metrics do not depend on prediction order") {
    std::map<std::string, std::string> pred;
  for (auto it = kTruth.rbegin(); it != kTruth.rend(); ++it) pred.emplace(it->first, it->first == "q2" ? "B" : it->second);
  const std::map<std::string, std::string> forward{{"q1", "A"}, {"q2", "B"}, {"q3", "B"}, {"q4", "B"}};
  const auto a = score(pred, kTruth);
  const auto b = score(forward, kTruth);
  CHECK(a.macro_f1 == b.macro_f1);
  CHECK(a.accuracy == b.accuracy);
}
