// Copyright (c) 2026, The tara-toolkit Authors
// SPDX-License-Identifier: Apache-2.0
//
#include "tara/llm_client.hpp"

#include <regex>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>

#include "tara/error.hpp"

namespace tara {

const std::string_view kAntonymPrompt =
    R"(You are a helpful assistant expert at natural language understanding and grammatical nuance.
You are given a caption.
Your task is to generate a temporally antonymous version of the caption.
You should retain the broader context of the caption but only change the action described in the caption as if the video is temporally reversed.
In case where the verb phrase in the caption may not have a temporal antonym, you should return the None as the output. Never return the same caption as the output.
Here are some examples:
(1) Caption: #C C unrolls the yarn from her left index finger
Output: #C C rolls the yarn onto her left index finger
(2) Caption: #C C folds the cloth
Output: #C C unfolds the cloth
(3) Caption: #C C puts the pan on the stove
Output: #C C takes the pan off the stove
(4) Caption: Someone is walking on the street
Output: None
(5) Caption: #C C checks the cloth
Output: None
Output in a JSON format {'caption_forward': ..., 'caption_reverse': ...} where caption_forward is the original caption and caption_reverse is the temporally reversed caption.)";

LlmClient::LlmClient(LlmClientConfig config) : config_(std::move(config)) {
  static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(config_.endpoint, m, kUrl)) {
    throw Error(fmt::format("invalid endpoint URL '{}'", config_.endpoint));
  }
  base_ = m[1].str();
  path_ = m[2].matched ? m[2].str() : "/";
  if (config_.retries < 0) throw Error("retries must be non-negative");
}

io::json LlmClient::request_antonym(std::string_view caption) const {
  io::json body;
  body["prompt"] = fmt::format("{}\n\nCaption: {}\nOutput:", kAntonymPrompt, caption);
  body["caption"] = std::string(caption);
  const auto payload = body.dump();

  std::string last_error;
  auto wait = config_.backoff;
  for (int attempt = 0; attempt <= config_.retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(wait);
      wait *= 2;
    }
    httplib::Client cli(base_);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
    cli.set_connection_timeout(secs.count(), usecs.count());
    cli.set_read_timeout(secs.count(), usecs.count());
    auto res = cli.Post(path_, payload, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = fmt::format("HTTP {}", res->status);
      continue;
    }
    if (res->status != 200) {
      throw Error(fmt::format("rewriter at {} answered HTTP {}", config_.endpoint, res->status));
    }
    try {
      return io::json::parse(res->body);
    } catch (const io::json::parse_error&) {
      throw Error(fmt::format("unparseable rewriter reply: {}", res->body));
    }
  }
  throw Error(fmt::format("transport failure talking to {} after {} attempts: {}", config_.endpoint,
                          config_.retries + 1, last_error));
}

}  // namespace tara
