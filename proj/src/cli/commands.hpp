// Copyright (c) 2026, The tara-toolkit Authors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tara/embedding.hpp"

namespace tara::cli {

struct Globals {
  std::string log_level;
  unsigned threads = 0;
};

using Action = std::function<int()>;

struct Command {
  CLI::App* app;
  Action action;
};

// Each registers a subcommand and returns the action to run when it parses.
Command add_mine(CLI::App& app, const Globals& g);
Command add_build_triplets(CLI::App& app, const Globals& g);
Command add_compose(CLI::App& app, const Globals& g);
Command add_train(CLI::App& app, const Globals& g);
Command add_gradcheck(CLI::App& app, const Globals& g);
Command add_gap(CLI::App& app, const Globals& g);
Command add_eval(CLI::App& app, const Globals& g);
Command add_report(CLI::App& app, const Globals& g);
Command add_sweep(CLI::App& app, const Globals& g);

std::filesystem::path data_path(const std::string& name);

/// Reads an embedding file and its manifest (default sidecar when empty),
/// normalizing rows when the file is not flagged normalized.
EmbeddingMatrix load_normalized(const std::string& path, const std::string& manifest = {});

/// Writes through a temp file and rename.
void write_output(const std::string& path, const std::string& content);

}  // namespace tara::cli
