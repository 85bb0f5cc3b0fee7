// Copyright (c) 2026, The tara-toolkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// eval, report, sweep
#include <iostream>
#include <map>
#include <memory>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "commands.hpp"
#include "tara/adapter.hpp"
#include "tara/composer.hpp"
#include "tara/embfile.hpp"
#include "tara/error.hpp"
#include "tara/evaluator.hpp"
#include "tara/io.hpp"

namespace tara::cli {

namespace {

std::vector<std::size_t> parse_ks(const std::string& s) {
  std::vector<std::size_t> ks;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    auto comma = s.find(',', pos);
    if (comma == std::string::npos) comma = s.size();
    const auto tok = s.substr(pos, comma - pos);
    try {
      std::size_t used = 0;
      const long v = std::stol(tok, &used);
      if (used != tok.size() || v < 1) throw std::invalid_argument(tok);
      ks.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw UsageError(fmt::format("bad k-list entry '{}'", tok));
    }
    pos = comma + 1;
  }
  return ks;
}

SimilarityMatrix task_sims(const RetrievalTask& task, const EmbeddingMatrix& queries, const EmbeddingMatrix& gallery,
                           unsigned threads) {
  return sim_matrix(queries.select(task.query_ids()), gallery.select(task.gallery), threads);
}

// relevance lines: {"query": id, "relevant": [gallery ids]}
std::vector<std::vector<std::size_t>> load_relevance(const std::string& path, const EmbeddingMatrix& queries,
                                                     const EmbeddingMatrix& gallery) {
  std::map<std::string, std::vector<std::size_t>> by_query;
  io::for_each_jsonl(path, [&](std::size_t line, const io::json& obj) {
    auto& rel = by_query[obj.at("query").get<std::string>()];
    for (const auto& id : obj.at("relevant")) {
      auto idx = gallery.index_of(id.get<std::string>());
      if (!idx) throw Error(fmt::format("{}:{}: '{}' is not in the gallery", path, line, id.get<std::string>()));
      rel.push_back(*idx);
    }
  });
  std::vector<std::vector<std::size_t>> out;
  for (const auto& id : queries.ids()) {
    auto it = by_query.find(id);
    if (it == by_query.end()) throw Error(fmt::format("{}: no relevance entry for query '{}'", path, id));
    out.push_back(it->second);
  }
  return out;
}

std::vector<std::string> load_labels(const std::string& path, const EmbeddingMatrix& m) {
  std::map<std::string, std::string> by_id;
  io::for_each_jsonl(path, [&](std::size_t, const io::json& obj) {
    by_id[obj.at("id").get<std::string>()] = obj.at("label").get<std::string>();
  });
  std::vector<std::string> out;
  for (const auto& id : m.ids()) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw Error(fmt::format("{}: no label for '{}'", path, id));
    out.push_back(it->second);
  }
  return out;
}

EmbeddingMatrix maybe_adapt(EmbeddingMatrix m, const std::optional<LoadedAdapter>& adapter) {
  return adapter ? forward(adapter->params, m) : m;
}

}  // namespace

Command add_eval(CLI::App& app, const Globals& g) {
  struct Opts {
    std::string mode = "retrieval", items, video, text, direction = "t2v", task = "chiral", ks = "1,5,10";
    std::string queries, negated, gallery, relevance, mcq, train, train_labels, test, test_labels;
    std::string adapter, out, csv;
    std::size_t k = 5;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("eval", "run an evaluation protocol and write a report");
  sub->add_option("--mode", o->mode, "retrieval|negation|composed|mcq|probe")
      ->check(CLI::IsMember({"retrieval", "negation", "composed", "mcq", "probe"}));
  sub->add_option("--items", o->items, "[retrieval] labeled items file")->check(CLI::ExistingFile);
  sub->add_option("--video", o->video, "[retrieval] video embeddings")->check(CLI::ExistingFile);
  sub->add_option("--text", o->text, "[retrieval] text embeddings")->check(CLI::ExistingFile);
  sub->add_option("--direction", o->direction, "[retrieval] t2v|v2t")->check(CLI::IsMember({"t2v", "v2t"}));
  sub->add_option("--task", o->task, "[retrieval] chiral|non_chiral|all")
      ->check(CLI::IsMember({"chiral", "non_chiral", "all"}));
  sub->add_option("--ks", o->ks, "[retrieval, composed] comma-separated recall cutoffs");
  sub->add_option("--queries", o->queries, "[negation, composed, mcq] query embeddings")->check(CLI::ExistingFile);
  sub->add_option("--negated", o->negated, "[negation] negated query embeddings, row-aligned")->check(CLI::ExistingFile);
  sub->add_option("--gallery", o->gallery, "[negation, composed] gallery embeddings")->check(CLI::ExistingFile);
  sub->add_option("--relevance", o->relevance, "[negation, composed] {query, relevant} lines")->check(CLI::ExistingFile);
  sub->add_option("--k", o->k, "[negation] recall cutoff")->check(CLI::PositiveNumber);
  sub->add_option("--mcq", o->mcq, "[mcq] {query, choices, answer} lines; choices come from --gallery")
      ->check(CLI::ExistingFile);
  sub->add_option("--train", o->train, "[probe] training embeddings")->check(CLI::ExistingFile);
  sub->add_option("--train-labels", o->train_labels, "[probe] {id, label} lines")->check(CLI::ExistingFile);
  sub->add_option("--test", o->test, "[probe] test embeddings")->check(CLI::ExistingFile);
  sub->add_option("--test-labels", o->test_labels, "[probe] {id, label} lines")->check(CLI::ExistingFile);
  sub->add_option("--adapter", o->adapter, "apply this adapter to every embedding set")->check(CLI::ExistingFile);
  sub->add_option("--out", o->out, "report JSON output")->required();
  sub->add_option("--csv", o->csv, "report CSV output");

  const Globals* globals = &g;
  return {sub, [o, globals] {
            auto need = [&](const std::string& v, const char* flag) {
              if (v.empty()) throw UsageError(fmt::format("--mode {} requires {}", o->mode, flag));
            };
            std::optional<LoadedAdapter> adapter;
            if (!o->adapter.empty()) adapter = load_adapter(o->adapter);
            EvalReport report;

            if (o->mode == "retrieval") {
              need(o->items, "--items");
              need(o->video, "--video");
              need(o->text, "--text");
              const auto ks = parse_ks(o->ks);
              const auto items = load_items(o->items);
              const auto direction = parse_direction(o->direction);
              const auto splits = build_splits(items, direction);
              for (const auto& d : splits.diagnostics) spdlog::warn("{}", d);
              const auto& task = splits.tasks.at(parse_split(o->task));
              if (task.queries.empty()) throw Error(fmt::format("split {} has no queries", o->task));
              const auto video = maybe_adapt(load_normalized(o->video), adapter);
              const auto text = maybe_adapt(load_normalized(o->text), adapter);
              const auto& q = direction == Direction::t2v ? text : video;
              const auto& gal = direction == Direction::t2v ? video : text;
              report = evaluate_retrieval(task_sims(task, q, gal, globals->threads), task, ks);
            } else if (o->mode == "negation") {
              need(o->queries, "--queries");
              need(o->negated, "--negated");
              need(o->gallery, "--gallery");
              need(o->relevance, "--relevance");
              const auto queries = maybe_adapt(load_normalized(o->queries), adapter);
              const auto negated = maybe_adapt(load_normalized(o->negated), adapter);
              const auto gallery = maybe_adapt(load_normalized(o->gallery), adapter);
              const auto rel = load_relevance(o->relevance, queries, gallery);
              const auto r = negation_eval(queries, negated, gallery, rel, o->k);
              report.task = "negation";
              report.metrics[fmt::format("r_at_{}", o->k)] = r.r_at_k;
              report.metrics[fmt::format("r_neg_at_{}", o->k)] = r.r_neg_at_k;
            } else if (o->mode == "composed") {
              need(o->queries, "--queries");
              need(o->gallery, "--gallery");
              need(o->relevance, "--relevance");
              const auto queries = maybe_adapt(load_normalized(o->queries), adapter);
              const auto gallery = maybe_adapt(load_normalized(o->gallery), adapter);
              report.task = "composed";
              report.metrics = composed_retrieval(queries, gallery, load_relevance(o->relevance, queries, gallery),
                                                  parse_ks(o->ks));
            } else if (o->mode == "mcq") {
              need(o->queries, "--queries");
              need(o->gallery, "--gallery");
              need(o->mcq, "--mcq");
              const auto queries = maybe_adapt(load_normalized(o->queries), adapter);
              const auto choices = maybe_adapt(load_normalized(o->gallery), adapter);
              std::vector<McqItem> items;
              io::for_each_jsonl(o->mcq, [&](std::size_t, const io::json& obj) {
                McqItem it;
                auto qr = queries.row(std::string_view(obj.at("query").get<std::string>()));
                it.query.assign(qr.begin(), qr.end());
                for (const auto& c : obj.at("choices")) {
                  auto cr = choices.row(std::string_view(c.get<std::string>()));
                  it.choices.emplace_back(cr.begin(), cr.end());
                }
                it.answer = obj.at("answer").get<std::size_t>();
                items.push_back(std::move(it));
              });
              report.task = "mcq";
              report.metrics["mcq_acc"] = mcq_accuracy(items);
            } else {
              need(o->train, "--train");
              need(o->train_labels, "--train-labels");
              need(o->test, "--test");
              need(o->test_labels, "--test-labels");
              const auto train = maybe_adapt(load_normalized(o->train), adapter);
              const auto test = maybe_adapt(load_normalized(o->test), adapter);
              report.task = "probe";
              report.metrics["probe_acc"] = nearest_centroid_probe(train, load_labels(o->train_labels, train), test,
                                                                   load_labels(o->test_labels, test));
            }

            validate(report);
            write_output(o->out, to_json(report).dump(2) + '\n');
            if (!o->csv.empty()) write_output(o->csv, report_csv(report));
            for (const auto& [k, v] : report.metrics) std::cout << fmt::format("{}={:.6f}\n", k, v);
            return 0;
          }};
}

Command add_report(CLI::App& app, const Globals&) {
  struct Opts {
    std::vector<std::string> runs;
    std::string out;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("report", "aggregate run directories into one CSV");
  sub->add_option("--runs", o->runs, "run directories (containing report.json) or report files")->required();
  sub->add_option("--out", o->out, "CSV output")->required();

  return {sub, [o] {
            std::string csv = "run,task,metric,value\n";
            for (const auto& run : o->runs) {
              std::filesystem::path p(run);
              if (std::filesystem::is_directory(p)) p /= "report.json";
              const auto report = report_from_json(io::json::parse(io::read_text(p)));
              for (const auto& [k, v] : report.metrics) csv += fmt::format("{},{},{},{:.6f}\n", run, report.task, k, v);
            }
            write_output(o->out, csv);
            return 0;
          }};
}

Command add_sweep(CLI::App& app, const Globals& g) {
  struct Opts {
    std::string static_pool, temporal_pool, embeddings, items, video, text, out_dir, direction = "v2t";
    std::vector<std::size_t> n{10000};
    std::vector<double> alpha{0.0, 0.1};
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    TrainConfig config;
    std::string optimizer = "adam";
    bool no_bias = false;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("sweep", "compose -> train -> eval over a grid of sizes, fractions and seeds");
  sub->add_option("--static", o->static_pool, "static triplet pool")->required()->check(CLI::ExistingFile);
  sub->add_option("--temporal", o->temporal_pool, "temporal triplet pool")->required()->check(CLI::ExistingFile);
  sub->add_option("--embeddings", o->embeddings, "sentence embeddings for training")->required()->check(CLI::ExistingFile);
  sub->add_option("--items", o->items, "labeled evaluation items")->required()->check(CLI::ExistingFile);
  sub->add_option("--video", o->video, "evaluation video embeddings")->required()->check(CLI::ExistingFile);
  sub->add_option("--text", o->text, "evaluation text embeddings")->required()->check(CLI::ExistingFile);
  sub->add_option("--direction", o->direction, "t2v|v2t")->check(CLI::IsMember({"t2v", "v2t"}));
  sub->add_option("--n", o->n, "dataset sizes")->delimiter(',');
  sub->add_option("--alpha", o->alpha, "temporal fractions")->delimiter(',')->check(CLI::Range(0.0, 1.0));
  sub->add_option("--seeds", o->seeds, "seeds")->delimiter(',');
  sub->add_option("--tau", o->config.tau, "temperature")->check(CLI::PositiveNumber);
  sub->add_option("--lr", o->config.lr, "learning rate")->check(CLI::NonNegativeNumber);
  sub->add_option("--batch", o->config.batch, "batch size")->check(CLI::PositiveNumber);
  sub->add_option("--epochs", o->config.epochs, "epochs")->check(CLI::PositiveNumber);
  sub->add_option("--optimizer", o->optimizer, "adam|sgd")->check(CLI::IsMember({"adam", "sgd"}));
  sub->add_flag("--no-bias", o->no_bias, "train without a bias vector");
  sub->add_option("--out-dir", o->out_dir, "directory for sweep.csv, sweep_plot.csv, sweep_chart.json")->required();

  const Globals* globals = &g;
  return {sub, [o, globals] {
            const auto st = load_triplets(o->static_pool);
            const auto te = load_triplets(o->temporal_pool);
            const auto base = read_embeddings(o->embeddings);
            const auto items = load_items(o->items);
            const auto direction = parse_direction(o->direction);
            const auto splits = build_splits(items, direction);
            const auto video = load_normalized(o->video);
            const auto text = load_normalized(o->text);
            auto config = o->config;
            config.optimizer = parse_optimizer(o->optimizer);
            config.bias = !o->no_bias;

            auto pipeline = [&](std::size_t n, double alpha, std::uint64_t seed) {
              const auto ds = compose(st, te, n, alpha, seed);
              auto c = config;
              c.seed = seed;
              const auto trained = train(ds, base, c);
              const auto v = forward(trained.params, video);
              const auto t = forward(trained.params, text);
              const auto& q = direction == Direction::t2v ? t : v;
              const auto& gal = direction == Direction::t2v ? v : t;
              std::map<std::string, double> row;
              row["n_static"] = static_cast<double>(ds.n_static);
              row["n_temporal"] = static_cast<double>(ds.n_temporal);
              for (const auto& [split, task] : splits.tasks) {
                if (task.queries.empty()) continue;
                const auto rep = evaluate_retrieval(task_sims(task, q, gal, globals->threads), task, {1});
                for (const auto& [k, val] : rep.metrics) row[fmt::format("{}_{}", to_string(split), k)] = val;
              }
              spdlog::info("sweep n={} alpha={} seed={} done", n, alpha, seed);
              return row;
            };
            const auto table = ablation_sweep({o->n, o->alpha, o->seeds}, pipeline);
            const std::filesystem::path dir(o->out_dir);
            std::filesystem::create_directories(dir);
            write_output((dir / "sweep.csv").string(), sweep_csv(table));
            write_output((dir / "sweep_plot.csv").string(), sweep_plot_csv(table));
            write_output((dir / "sweep_chart.json").string(), sweep_chart_spec("sweep_plot.csv", "chiral_map"));
            std::cout << fmt::format("runs={} cells={}\n", table.runs.size(), table.aggregates.size());
            return 0;
          }};
}

}  // namespace tara::cli
