// Copyright (c) 2026, The tara-toolkit Authors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>

#include <json.hpp>

namespace tara::io {

using json = nlohmann::ordered_json;

/// Calls fn(line_number, object) for every non-blank line of a JSON-lines
/// file. Parse failures are reported as "<path>:<line>: ...".
void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(std::size_t, const json&)>& fn);

std::string read_text(const std::filesystem::path& path);

/// Writes to a sibling temp file then renames over the target.
void write_atomic(const std::filesystem::path& path, std::string_view content);

/// Compact single-line JSON as written in every .jsonl output.
std::string to_line(const json& j);

}  // namespace tara::io
