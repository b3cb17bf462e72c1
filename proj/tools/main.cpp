// SPDX-FileCopyrightText: (c) 2026 the lenslab authors
//
// SPDX-License-Identifier: Apache-2.0
#include "lenslab/cli.hpp"

int main(int argc, char** argv) { return lenslab::run_cli(argc, argv); }
