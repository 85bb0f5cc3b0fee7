// Copyright (c) 2026, The tara-toolkit Authors
// SPDX-License-Identifier: Apache-2.0
//
#include "tara/cli.hpp"

int main(int argc, char** argv) { return tara::cli::run(argc, argv); }
