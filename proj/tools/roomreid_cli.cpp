// Copyright 2026 The roomreid Authors
// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "roomreid/config.hpp"
#include "roomreid/database.hpp"
#include "roomreid/error.hpp"
#include "roomreid/eval.hpp"
#include "roomreid/manifest.hpp"
#include "roomreid/pipeline.hpp"
#include "roomreid/synth.hpp"

namespace fs = std::filesystem;
using namespace roomreid;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitInvariant = 4;

constexpr const char* kIndexFile = "index.rrdb";
constexpr const char* kEffectiveConfig = "effective_config.json";

// Command-line overrides for ScoringConfig; unset fields fall through to the file or the index.
struct ScoringFlags {
  std::optional<std::string> config_path;
  std::optional<std::string> patch_strategy;
  std::optional<std::string> object_strategy;
  std::optional<bool> use_global;
  std::optional<bool> use_patch;
  std::optional<bool> use_object;
  std::optional<bool> use_fine_grained;
  std::optional<std::size_t> stage1_k;
  std::optional<std::size_t> stage2_k;
  std::optional<double> nms_iou;
  std::optional<double> object_conf_threshold;

  void attach(CLI::App& cmd) {
    cmd.add_option("--config", config_path, "JSON file with scoring settings")->check(CLI::ExistingFile);
    cmd.add_option("--patch-strategy", patch_strategy, "mean or max");
    cmd.add_option("--object-strategy", object_strategy, "mean or max");
    cmd.add_option("--use-global", use_global);
    cmd.add_option("--use-patch", use_patch);
    cmd.add_option("--use-object", use_object);
    cmd.add_option("--use-fine-grained", use_fine_grained);
    cmd.add_option("--stage1-k", stage1_k);
    cmd.add_option("--stage2-k", stage2_k);
    cmd.add_option("--nms-iou", nms_iou);
    cmd.add_option("--object-threshold", object_conf_threshold);
  }

  scoring::ScoringConfig resolve(scoring::ScoringConfig base = {}) const {
    if (config_path) base = config::from_json(config::to_json(config::load(*config_path)), base);
    nlohmann::json j = nlohmann::json::object();
    if (patch_strategy) j["patch_strategy"] = *patch_strategy;
    if (object_strategy) j["object_strategy"] = *object_strategy;
    if (use_global) j["use_global"] = *use_global;
    if (use_patch) j["use_patch"] = *use_patch;
    if (use_object) j["use_object"] = *use_object;
    if (use_fine_grained) j["use_fine_grained"] = *use_fine_grained;
    if (stage1_k) j["stage1_k"] = *stage1_k;
    if (stage2_k) j["stage2_k"] = *stage2_k;
    if (nms_iou) j["nms_iou"] = *nms_iou;
    if (object_conf_threshold) j["object_conf_threshold"] = *object_conf_threshold;
    return config::from_json(j, base);
  }

  bool any_set() const {
    return config_path || patch_strategy || object_strategy || use_global || use_patch || use_object ||
           use_fine_grained || stage1_k || stage2_k || nms_iou || object_conf_threshold;
  }
};

struct RunArgs {
  std::string manifest;
  std::string index;
  std::string out;
  std::optional<std::string> match_counts;
  std::size_t workers = 1;
  ScoringFlags scoring;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << text;
}

fs::path prepare_out(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw DataError("cannot create output directory '" + dir + "'");
  return dir;
}

manifest::Dataset load_manifest(const std::string& dir) {
  if (!fs::exists(fs::path(dir) / manifest::kHeaderFile)) throw NotFoundError("manifest not found: '" + dir + "'");
  return manifest::read(dir);
}

ProviderBundle providers_for(const RunArgs& args) {
  if (!args.match_counts) return ProviderBundle::builtin();
  return ProviderBundle(std::make_shared<ObjectPoolingPatchProvider>(),
                        std::make_shared<MatchCountTable>(MatchCountTable::load(*args.match_counts)));
}

void echo_config(const fs::path& out, const scoring::ScoringConfig& cfg, const RunArgs& args) {
  nlohmann::ordered_json j;
  j["scoring"] = nlohmann::ordered_json::parse(config::to_json(cfg).dump());
  j["workers"] = args.workers;
  if (!args.manifest.empty()) j["manifest"] = args.manifest;
  if (!args.index.empty()) j["index"] = args.index;
  if (args.match_counts) j["match_counts"] = *args.match_counts;
  write_text(out / kEffectiveConfig, j.dump(2) + "\n");
}

struct QueryRun {
  std::vector<SceneRecord> queries;
  std::vector<pipeline::BatchItem> items;
  std::size_t failures = 0;
  std::string first_failure;
};

// Shared by query and evaluate: resolve config, run the batch, write traces.
QueryRun run_queries(const RunArgs& args, const fs::path& out, scoring::ScoringConfig& cfg) {
  const auto data = load_manifest(args.manifest);
  const auto db = database::load_database(args.index);
  cfg = args.scoring.resolve(db.build_config);
  echo_config(out, cfg, args);

  QueryRun run;
  run.queries = data.split(Split::kQuery);
  if (run.queries.empty()) throw DataError("manifest '" + args.manifest + "' holds no query images");
  run.items = pipeline::query_batch(run.queries, db, cfg, providers_for(args), args.workers);

  std::string traces;
  for (std::size_t i = 0; i < run.items.size(); ++i) {
    if (const auto* r = std::get_if<pipeline::RetrievalResult>(&run.items[i])) {
      traces += pipeline::trace_record(*r).dump() + "\n";
    } else {
      const auto& msg = std::get<std::string>(run.items[i]);
      traces += pipeline::trace_error(run.queries[i].image_id, msg).dump() + "\n";
      if (run.failures++ == 0) run.first_failure = run.queries[i].image_id + ": " + msg;
    }
  }
  write_text(out / "traces.jsonl", traces);
  return run;
}

void fail_if_any(const QueryRun& run) {
  if (run.failures > 0) {
    throw DataError(fmt::format("{} of {} queries failed; first {}", run.failures, run.queries.size(), run.first_failure));
  }
}

std::map<std::string, std::string> truth_of(std::span<const SceneRecord> queries) {
  std::map<std::string, std::string> truth;
  for (const auto& q : queries) truth[q.image_id] = q.room_id;
  return truth;
}

void write_reports(const fs::path& out, const std::vector<std::pair<std::string, eval::MetricReport>>& rows) {
  std::string records;
  for (const auto& [label, report] : rows) records += eval::report_record(label, report).dump() + "\n";
  write_text(out / "metrics.jsonl", records);
  const auto table = eval::compare_table(rows);
  write_text(out / "metrics.txt", table);
  write_text(out / "timings.txt", eval::timing_table(rows));
  std::cout << table;
}

int cmd_synth(const synth::SynthSpec& spec_flags, const std::optional<std::string>& spec_path,
              const nlohmann::json& overrides, std::size_t views, const std::string& out_dir) {
  synth::SynthSpec spec = spec_flags;
  if (spec_path) {
    std::ifstream in(*spec_path);
    if (!in) throw NotFoundError("synth spec not found: '" + *spec_path + "'");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("synth spec '" + *spec_path + "' is not valid JSON: " + e.what());
    }
    spec = synth::spec_from_json(j, spec);
  }
  spec = synth::spec_from_json(overrides, spec);
  spec.validate();
  const auto out = prepare_out(out_dir);
  const auto g = synth::generate(spec, views);
  manifest::write(g.dataset, out);
  nlohmann::json echo = synth::to_json(spec);
  echo["views_per_room"] = views;
  write_text(out / "synth_spec.json", echo.dump(2) + "\n");
  fmt::print("wrote {} records ({} rooms, {} queries) to {}\n", g.dataset.records.size(), spec.n_rooms,
             g.dataset.split(Split::kQuery).size(), out.string());
  return 0;
}

int cmd_build_db(const RunArgs& args) {
  const auto data = load_manifest(args.manifest);
  const auto cfg = args.scoring.resolve();
  const auto out = prepare_out(args.out);
  echo_config(out, cfg, args);
  const auto pool = data.split(Split::kReferencePool);
  if (pool.empty()) throw DataError("manifest '" + args.manifest + "' holds no reference-pool images");
  const auto db = database::build_database(pool, cfg, ProviderBundle::builtin());
  database::save_database(db, out / kIndexFile);
  fmt::print("rooms: {}\n", db.room_count());
  for (const auto& [room, ref] : db.refs) {
    fmt::print("{}\treference={}\tobjects={}\tpatches={}\n", room, ref.image_id, ref.objects.size(),
               db.patches.at(room).size());
  }
  return 0;
}

int cmd_query(const RunArgs& args) {
  const auto out = prepare_out(args.out);
  scoring::ScoringConfig cfg;
  const auto run = run_queries(args, out, cfg);
  for (const auto& item : run.items) {
    if (const auto* r = std::get_if<pipeline::RetrievalResult>(&item)) {
      fmt::print("{}\t{}\n", r->query_image_id, r->final_room_id);
    }
  }
  fail_if_any(run);
  return 0;
}

int cmd_evaluate(const RunArgs& args) {
  const auto out = prepare_out(args.out);
  scoring::ScoringConfig cfg;
  const auto run = run_queries(args, out, cfg);
  fail_if_any(run);
  auto report = eval::score(eval::predictions_of(run.items), truth_of(run.queries));
  std::vector<pipeline::RetrievalResult> ok;
  for (const auto& item : run.items) ok.push_back(std::get<pipeline::RetrievalResult>(item));
  eval::attach_timings(report, ok);
  write_reports(out, {{"Evaluation", report}});
  return 0;
}

int cmd_ablate(const RunArgs& args) {
  const auto data = load_manifest(args.manifest);
  const auto db = database::load_database(args.index);
  const auto cfg = args.scoring.resolve(db.build_config);
  const auto out = prepare_out(args.out);
  echo_config(out, cfg, args);
  const auto queries = data.split(Split::kQuery);
  if (queries.empty()) throw DataError("manifest '" + args.manifest + "' holds no query images");
  const auto runs = eval::run_ablations(queries, truth_of(queries), db, cfg, providers_for(args), args.workers);
  std::vector<std::pair<std::string, eval::MetricReport>> rows;
  for (const auto& r : runs) {
    std::size_t failed = 0;
    for (const auto& item : r.items) failed += std::holds_alternative<std::string>(item);
    if (failed > 0) throw DataError(fmt::format("{}: {} of {} queries failed", r.label, failed, queries.size()));
    rows.emplace_back(r.label, r.report);
  }
  write_reports(out, rows);
  return 0;
}

void add_run_options(CLI::App& cmd, RunArgs& args, bool needs_index) {
  cmd.add_option("--manifest", args.manifest, "dataset manifest directory")->required();
  if (needs_index) cmd.add_option("--index", args.index, "reference index file")->required();
  cmd.add_option("--out", args.out, "output directory")->required();
  if (needs_index) {
    cmd.add_option("--match-counts", args.match_counts, "precomputed fine-match count table")->check(CLI::ExistingFile);
    cmd.add_option("--workers", args.workers, "query worker threads")->check(CLI::PositiveNumber);
  }
  args.scoring.attach(cmd);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Room reidentification retrieval engine"};
  app.require_subcommand(1);

  synth::SynthSpec spec;
  std::optional<std::string> spec_path;
  std::optional<std::size_t> rooms, dim;
  std::optional<double> noise, dropout, distractor;
  std::optional<std::uint64_t> seed;
  std::size_t views = 3;
  std::string synth_out;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic dataset manifest");
  synth_cmd->add_option("--spec", spec_path, "JSON generator spec")->check(CLI::ExistingFile);
  synth_cmd->add_option("--rooms", rooms);
  synth_cmd->add_option("--dim", dim, "feature dimension");
  synth_cmd->add_option("--noise", noise, "viewpoint noise sigma");
  synth_cmd->add_option("--dropout", dropout);
  synth_cmd->add_option("--distractor", distractor, "cross-room similarity in [0, 1)");
  synth_cmd->add_option("--seed", seed);
  synth_cmd->add_option("--views", views, "query views per room");
  synth_cmd->add_option("--out", synth_out, "output manifest directory")->required();

  RunArgs build_args, query_args, eval_args, ablate_args;
  auto* build_cmd = app.add_subcommand("build-db", "build a reference index from a manifest");
  add_run_options(*build_cmd, build_args, false);
  auto* query_cmd = app.add_subcommand("query", "retrieve rooms for every query image");
  add_run_options(*query_cmd, query_args, true);
  auto* eval_cmd = app.add_subcommand("evaluate", "score retrieval against manifest room labels");
  add_run_options(*eval_cmd, eval_args, true);
  auto* ablate_cmd = app.add_subcommand("ablate", "evaluate every module ablation");
  add_run_options(*ablate_cmd, ablate_args, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "roomreid: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (synth_cmd->parsed()) {
      nlohmann::json overrides = nlohmann::json::object();
      if (rooms) overrides["n_rooms"] = *rooms;
      if (dim) overrides["feature_dim"] = *dim;
      if (noise) overrides["viewpoint_noise"] = *noise;
      if (dropout) overrides["dropout"] = *dropout;
      if (distractor) overrides["distractor_similarity"] = *distractor;
      if (seed) overrides["rng_seed"] = *seed;
      return cmd_synth(spec, spec_path, overrides, views, synth_out);
    }
    if (build_cmd->parsed()) return cmd_build_db(build_args);
    if (query_cmd->parsed()) return cmd_query(query_args);
    if (eval_cmd->parsed()) return cmd_evaluate(eval_args);
    if (ablate_cmd->parsed()) return cmd_ablate(ablate_args);
  } catch (const DataError& e) {
    std::cerr << "roomreid: " << e.what() << "\n";
    return kExitData;
  } catch (const ProviderError& e) {
    std::cerr << "roomreid: " << e.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "roomreid: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "roomreid: internal error: " << e.what() << "\n";
    return kExitInvariant;
  }
  return kExitUsage;
}
