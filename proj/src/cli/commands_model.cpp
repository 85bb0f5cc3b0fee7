// Copyright (c) 2026, The tara-toolkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// train, gradcheck, gap
#include <iostream>
#include <memory>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "commands.hpp"
#include "tara/adapter.hpp"
#include "tara/embfile.hpp"
#include "tara/error.hpp"
#include "tara/evaluator.hpp"

namespace tara::cli {

namespace {

void add_train_flags(CLI::App* sub, TrainConfig& c, std::string& optimizer, bool& no_bias) {
  sub->add_option("--tau", c.tau, "temperature")->check(CLI::PositiveNumber);
  sub->add_option("--lr", c.lr, "learning rate (0 freezes the adapter)")->check(CLI::NonNegativeNumber);
  sub->add_option("--batch", c.batch, "batch size")->check(CLI::PositiveNumber);
  sub->add_option("--epochs", c.epochs, "epochs")->check(CLI::PositiveNumber);
  sub->add_option("--optimizer", optimizer, "adam|sgd")->check(CLI::IsMember({"adam", "sgd"}));
  sub->add_option("--beta1", c.beta1, "adam first-moment decay")->check(CLI::Range(0.0, 0.999999));
  sub->add_option("--beta2", c.beta2, "adam second-moment decay")->check(CLI::Range(0.0, 0.999999));
  sub->add_option("--eps", c.eps, "adam epsilon")->check(CLI::PositiveNumber);
  sub->add_option("--dim-out", c.dim_out, "output dimension (0 keeps the input dimension)");
  sub->add_flag("--no-bias", no_bias, "train without a bias vector");
}

}  // namespace

Command add_train(CLI::App& app, const Globals&) {
  struct Opts {
    std::string dataset, embeddings, manifest, out, history, init;
    TrainConfig config;
    std::string optimizer = "adam";
    bool no_bias = false;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("train", "train a projection adapter on a triplet dataset");
  sub->add_option("--dataset", o->dataset, "output of `compose`")->required()->check(CLI::ExistingFile);
  sub->add_option("--embeddings", o->embeddings, "TARAEMB1 file whose ids are the dataset sentences")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--manifest", o->manifest, "id manifest (default: <embeddings>.ids.jsonl)");
  sub->add_option("--init", o->init, "adapter JSON to start from instead of identity")->check(CLI::ExistingFile);
  sub->add_option("--seed", o->config.seed, "batch-order seed");
  add_train_flags(sub, o->config, o->optimizer, o->no_bias);
  sub->add_option("--out", o->out, "adapter JSON output")->required();
  sub->add_option("--history", o->history, "per-step loss CSV output");

  return {sub, [o] {
            auto config = o->config;
            config.optimizer = parse_optimizer(o->optimizer);
            config.bias = !o->no_bias;
            const auto dataset = load_dataset(o->dataset);
            const auto base = o->manifest.empty() ? read_embeddings(o->embeddings)
                                                  : read_embeddings(o->embeddings, o->manifest);
            auto result = o->init.empty() ? train(dataset, base, config)
                                          : train(dataset, base, config, load_adapter(o->init).params);
            write_output(o->out, serialize_adapter(result.params, config));
            const auto& h = result.history;
            if (!o->history.empty()) {
              std::string csv = "epoch,step,loss\n";
              for (std::size_t s = 0; s < h.step_loss.size(); ++s) {
                csv += fmt::format("{},{},{:.9g}\n", s / h.steps_per_epoch, s, h.step_loss[s]);
              }
              write_output(o->history, csv);
            }
            for (std::size_t e = 0; e < h.epoch_mean_loss.size(); ++e) {
              spdlog::info("epoch {} mean loss {:.6f} ({:.2f}s)", e, h.epoch_mean_loss[e], h.epoch_seconds[e]);
              std::cout << fmt::format("epoch={} mean_loss={:.6f}\n", e, h.epoch_mean_loss[e]);
            }
            return 0;
          }};
}

Command add_gradcheck(CLI::App& app, const Globals&) {
  struct Opts {
    std::size_t dim = 8, batch = 4;
    std::uint64_t seed = 1;
    double tau = 0.05, h = 1e-4;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("gradcheck", "compare analytic and finite-difference adapter gradients");
  sub->add_option("--dim", o->dim, "embedding dimension")->check(CLI::PositiveNumber);
  sub->add_option("--batch", o->batch, "batch size")->check(CLI::PositiveNumber);
  sub->add_option("--seed", o->seed, "instance seed");
  sub->add_option("--tau", o->tau, "temperature")->check(CLI::PositiveNumber);
  sub->add_option("--step", o->h, "finite-difference step")->check(CLI::PositiveNumber);

  return {sub, [o] {
            const auto inst = random_grad_instance(o->dim, o->batch, o->seed);
            const double err = grad_check(inst.params, inst.batch, o->tau, o->h);
            std::cout << fmt::format("max_rel_err={:.3e}\n", err);
            return err < 1e-3 ? 0 : 1;
          }};
}

Command add_gap(CLI::App& app, const Globals&) {
  struct Opts {
    std::string video, text, video_manifest, text_manifest, adapter;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("gap", "distance between video and text embedding centroids");
  sub->add_option("--video", o->video, "video TARAEMB1 file")->required()->check(CLI::ExistingFile);
  sub->add_option("--text", o->text, "text TARAEMB1 file")->required()->check(CLI::ExistingFile);
  sub->add_option("--video-manifest", o->video_manifest, "video id manifest");
  sub->add_option("--text-manifest", o->text_manifest, "text id manifest");
  sub->add_option("--adapter", o->adapter, "apply this adapter to both sets first")->check(CLI::ExistingFile);

  return {sub, [o] {
            auto video = load_normalized(o->video, o->video_manifest);
            auto text = load_normalized(o->text, o->text_manifest);
            if (!o->adapter.empty()) {
              const auto a = load_adapter(o->adapter);
              video = forward(a.params, video);
              text = forward(a.params, text);
            }
            std::cout << fmt::format("{:.6f}\n", modality_gap(video, text));
            return 0;
          }};
}

}  // namespace tara::cli
