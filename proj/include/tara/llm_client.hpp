// Copyright (c) 2026, The tara-toolkit Authors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <chrono>
#include <string>
#include <string_view>

#include "tara/io.hpp"

namespace tara {

/// Instruction sent ahead of every caption to the antonym rewriting service.
extern const std::string_view kAntonymPrompt;

struct LlmClientConfig {
  std::string endpoint;  // http://host[:port][/path]
  std::chrono::milliseconds timeout{30000};
  int retries = 3;
  std::chrono::milliseconds backoff{500};  // doubled after every failed attempt
};

/// POSTs {"prompt", "caption"} and returns the decoded JSON reply
/// {"caption_forward", "caption_reverse"}. Each call opens its own
/// connection, so one client may be shared between threads.
class LlmClient {
 public:
  explicit LlmClient(LlmClientConfig config);

  io::json request_antonym(std::string_view caption) const;

  const LlmClientConfig& config() const { return config_; }

 private:
  LlmClientConfig config_;
  std::string base_;  // scheme://host:port
  std::string path_;
};

}  // namespace tara
