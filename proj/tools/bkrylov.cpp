// Copyright (c) bkrylov contributors
// SPDX-License-Identifier: Apache-2.0
#include "bkr/cli.hpp"

int main(int argc, char** argv) { return bkr::cli::run(argc, argv); }
