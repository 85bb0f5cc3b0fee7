// Copyright (c) 2026, The tara-toolkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// mine, build-triplets, compose
#include <iostream>
#include <memory>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "commands.hpp"
#include "tara/composer.hpp"
#include "tara/error.hpp"
#include "tara/llm_client.hpp"
#include "tara/miner.hpp"

namespace tara::cli {

Command add_mine(CLI::App& app, const Globals&) {
  struct Opts {
    std::string corpus, lexicon, lemmas, out, rewriter = "template", endpoint;
    int timeout_ms = 30000;
    int retries = 3;
    int backoff_ms = 500;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("mine", "find chiral verb captions and write their temporal antonyms");
  sub->add_option("--corpus", o->corpus, "caption JSON-lines file")->required()->check(CLI::ExistingFile);
  sub->add_option("--lexicon", o->lexicon, "chiral lexicon (default: shipped)")->check(CLI::ExistingFile);
  sub->add_option("--lemmas", o->lemmas, "inflection table (default: shipped)")->check(CLI::ExistingFile);
  sub->add_option("--rewriter", o->rewriter, "template|external")->check(CLI::IsMember({"template", "external"}));
  sub->add_option("--endpoint", o->endpoint, "rewriter service URL for --rewriter external");
  sub->add_option("--timeout-ms", o->timeout_ms, "per-request timeout")->check(CLI::PositiveNumber);
  sub->add_option("--retries", o->retries, "retries after a transport failure")->check(CLI::NonNegativeNumber);
  sub->add_option("--backoff-ms", o->backoff_ms, "first retry delay, doubled per retry")->check(CLI::NonNegativeNumber);
  sub->add_option("--out", o->out, "mined JSON-lines output")->required();

  return {sub, [o] {
            if (o->rewriter == "external" && o->endpoint.empty()) {
              throw UsageError("--rewriter external requires --endpoint");
            }
            const auto corpus = load_corpus(o->corpus);
            const auto lexicon = load_lexicon(o->lexicon.empty() ? data_path("chiral_lexicon.jsonl").string() : o->lexicon);
            const auto lemmas = LemmaTable::load(o->lemmas.empty() ? data_path("lemmas.tsv").string() : o->lemmas);
            const auto mined = mine_chiral(corpus, lexicon, lemmas);

            std::unique_ptr<LlmClient> client;
            if (o->rewriter == "external") {
              client = std::make_unique<LlmClient>(LlmClientConfig{o->endpoint, std::chrono::milliseconds(o->timeout_ms),
                                                                   o->retries, std::chrono::milliseconds(o->backoff_ms)});
            }
            std::vector<MinedRecord> records;
            std::size_t antonyms = 0;
            for (const auto& m : mined) {
              auto r = client ? rewrite_antonym_external(m, *client) : rewrite_antonym_template(m, lexicon, lemmas);
              if (r.antonym) {
                ++antonyms;
              } else {
                spdlog::info("{}: no antonym ({})", m.caption.id, r.diagnostic);
              }
              records.push_back({m, std::move(r)});
            }
            write_output(o->out, serialize_mined(records));
            std::cout << fmt::format("captions={} matched={} antonyms={} skipped={}\n", corpus.size(), mined.size(),
                                     antonyms, mined.size() - antonyms);
            return 0;
          }};
}

Command add_build_triplets(CLI::App& app, const Globals&) {
  struct Opts {
    std::string mined, lexicon, lemmas, subjects, out;
    std::uint64_t seed = 17;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("build-triplets", "turn mined captions into temporal triplets");
  sub->add_option("--mined", o->mined, "output of `mine`")->required()->check(CLI::ExistingFile);
  sub->add_option("--lexicon", o->lexicon, "chiral lexicon (default: shipped)")->check(CLI::ExistingFile);
  sub->add_option("--lemmas", o->lemmas, "inflection table (default: shipped)")->check(CLI::ExistingFile);
  sub->add_option("--subjects", o->subjects, "subject pool, one per line (default: shipped)")->check(CLI::ExistingFile);
  sub->add_option("--seed", o->seed, "sampling seed");
  sub->add_option("--out", o->out, "triplet JSON-lines output")->required();

  return {sub, [o] {
            const auto lexicon = load_lexicon(o->lexicon.empty() ? data_path("chiral_lexicon.jsonl").string() : o->lexicon);
            const auto lemmas = LemmaTable::load(o->lemmas.empty() ? data_path("lemmas.tsv").string() : o->lemmas);
            const auto pool = load_subject_pool(o->subjects.empty() ? data_path("subjects.txt").string() : o->subjects);
            const auto mined = load_mined(o->mined, lexicon, lemmas);
            const VerbObjectIndex index(mined);
            Rng rng(o->seed);
            TemporalBuildStats stats;
            const auto triplets = build_temporal_triplets(mined, index, pool, rng, &stats);
            write_output(o->out, serialize_triplets(triplets));
            std::cout << fmt::format("triplets={} skipped_no_positive={} skipped_no_antonym={}\n", stats.built,
                                     stats.skipped_no_positive, stats.skipped_no_antonym);
            return 0;
          }};
}

Command add_compose(CLI::App& app, const Globals&) {
  struct Opts {
    std::string static_pool, temporal_pool, out;
    std::size_t n = 10000;
    double alpha = 0.1;
    std::uint64_t seed = 17;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("compose", "mix static and temporal triplets into a training set");
  sub->add_option("--static", o->static_pool, "static triplet pool")->required()->check(CLI::ExistingFile);
  sub->add_option("--temporal", o->temporal_pool, "temporal triplet pool")->required()->check(CLI::ExistingFile);
  sub->add_option("--n", o->n, "dataset size")->check(CLI::PositiveNumber);
  sub->add_option("--alpha", o->alpha, "temporal fraction in [0, 1]")->check(CLI::Range(0.0, 1.0));
  sub->add_option("--seed", o->seed, "sampling seed");
  sub->add_option("--out", o->out, "dataset output")->required();

  return {sub, [o] {
            const auto st = load_triplets(o->static_pool);
            const auto te = load_triplets(o->temporal_pool);
            for (const auto& t : st) {
              if (t.kind != TripletKind::static_bias) throw Error(fmt::format("{}: contains a temporal triplet", o->static_pool));
            }
            for (const auto& t : te) {
              if (t.kind != TripletKind::temporal) throw Error(fmt::format("{}: contains a static triplet", o->temporal_pool));
            }
            const auto ds = compose(st, te, o->n, o->alpha, o->seed);
            write_output(o->out, serialize_dataset(ds));
            std::cout << fmt::format("n_static={} n_temporal={}\n", ds.n_static, ds.n_temporal);
            return 0;
          }};
}

}  // namespace tara::cli
