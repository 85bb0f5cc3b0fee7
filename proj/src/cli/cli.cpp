// Copyright (c) 2026, The tara-toolkit Authors
// SPDX-License-Identifier: Apache-2.0
//
#include "tara/cli.hpp"

#include <cstdlib>
#include <iostream>
#include <map>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "commands.hpp"
#include "tara/embfile.hpp"
#include "tara/error.hpp"
#include "tara/io.hpp"

namespace tara::cli {

std::filesystem::path data_path(const std::string& name) {
  if (const char* dir = std::getenv("TARA_DATA_DIR")) return std::filesystem::path(dir) / name;
  return std::filesystem::path(TARA_DEFAULT_DATA_DIR) / name;
}

EmbeddingMatrix load_normalized(const std::string& path, const std::string& manifest) {
  auto m = manifest.empty() ? read_embeddings(path) : read_embeddings(path, manifest);
  return m.normalized() ? m : l2_normalize(m);
}

void write_output(const std::string& path, const std::string& content) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  io::write_atomic(path, content);
}

namespace {

spdlog::level::level_enum parse_level(const std::string& s) {
  static const std::map<std::string, spdlog::level::level_enum> kLevels = {
      {"error", spdlog::level::err}, {"warn", spdlog::level::warn}, {"info", spdlog::level::info},
      {"debug", spdlog::level::debug}};
  auto it = kLevels.find(s);
  if (it == kLevels.end()) throw UsageError("log level must be one of error, warn, info, debug");
  return it->second;
}

void setup_logging(const std::string& flag) {
  static auto logger = spdlog::stderr_color_mt("tara");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  std::string level = "warn";
  if (const char* env = std::getenv("TARA_LOG")) level = env;
  if (!flag.empty()) level = flag;
  spdlog::set_level(parse_level(level));
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Time-aware embedding toolkit: mine chiral triplets, train adapters, evaluate retrieval."};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--log-level", g.log_level, "error|warn|info|debug (overrides TARA_LOG)");
  app.add_option("--threads", g.threads, "worker threads for similarity kernels (0 = all cores)");

  std::vector<Command> commands;
  for (auto add : {add_mine, add_build_triplets, add_compose, add_train, add_gradcheck, add_gap, add_eval, add_report,
                   add_sweep}) {
    commands.push_back(add(app, g));
  }

  std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    setup_logging(g.log_level);
    for (const auto& c : commands) {
      if (c.app->parsed()) return c.action();
    }
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

int run(int argc, char** argv) { return run(std::vector<std::string>(argv, argv + argc)); }

}  // namespace tara::cli
