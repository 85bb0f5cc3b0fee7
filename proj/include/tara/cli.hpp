// Copyright (c) 2026, The tara-toolkit Authors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <string>
#include <vector>

namespace tara::cli {

/// Exit codes: 0 success, 1 runtime failure, 2 usage error.
int run(int argc, char** argv);
/// args[0] is the program name.
int run(const std::vector<std::string>& args);

}  // namespace tara::cli
